#ifndef GSO_ANNOTATION_HTTP_H_
#define GSO_ANNOTATION_HTTP_H_

#include "gso/annotation.h"

namespace httplib {
class Server;
}

namespace gso {

// Routes:
//   GET  /forest                     three trees, nodes in pre-order
//   GET  /synsets?q=&pos=            prefix search
//   GET  /tasks/next?worker=         lease a task (or X-Worker-Id header)
//   POST /annotations                {worker_id, gif_id, pairs, judgment}
//   GET  /gifs/{id}/consolidated
//   GET  /export                     dataset records, one per line
//   GET  /stats
//   POST /workers                    {worker_id}
//   POST /tasks                      {gif_id, gif_uri, required_workers?}
// Errors answer {"error": {"code", "message", "positions"}}.
void RegisterRoutes(httplib::Server &server, AnnotationService &service);

int HttpStatusFor(ErrorCode code);

}  // namespace gso

#endif  // GSO_ANNOTATION_HTTP_H_
