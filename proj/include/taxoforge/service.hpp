#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "taxoforge/devloop.hpp"
#include "taxoforge/mapping.hpp"
#include "taxoforge/metrics.hpp"
#include "taxoforge/taxonomy.hpp"

namespace taxoforge {

struct ApiRequest {
    std::string method;
    std::string path;
    std::map<std::string, std::string> query;
    std::string body;
};

struct ApiResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
    std::map<std::string, std::string> headers;
};

// HTTP status for an error code.
int http_status(const std::string& code);
// Every machine code a 4xx or 5xx response may carry, with its status.
Json error_catalog();

// Transport-independent API. serve() binds it to HTTP; tests call handle()
// directly. Session mutations are serialized per session and guarded by
// the revision the caller last saw.
class Service {
public:
    Service(Taxonomy bundle_taxonomy, Crosswalk bundle_crosswalk);

    ApiResponse handle(const ApiRequest& req);

    // Blocks until stop(). An empty static_dir serves the API only; otherwise
    // the directory is mounted at /ui.
    void serve(const std::string& host, int port, const std::string& static_dir = "");
    // Binds to a free port and returns it; serving runs on a background thread.
    int serve_background(const std::string& host);
    void stop();

    ~Service();

private:
    struct Slot {
        std::mutex mu;
        Session session;
        std::map<std::pair<std::string, std::string>, Adjudication> adjudications;
    };

    std::shared_ptr<Slot> find_session(const std::string& id);
    ApiResponse route(const ApiRequest& req);
    ApiResponse create_session(const ApiRequest& req);
    ApiResponse mutate(const std::shared_ptr<Slot>& slot, const std::string& action, const ApiRequest& req);
    ApiResponse metrics(const ApiRequest& req);
    ApiResponse orthogonality(const ApiRequest& req);
    ApiResponse adjudicate(const ApiRequest& req);

    Taxonomy bundle_taxonomy_;
    Crosswalk bundle_crosswalk_;
    std::mutex mu_;  // guards sessions_, next_id_ and bundle_adjudications_
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::size_t next_id_ = 1;
    std::map<std::pair<std::string, std::string>, Adjudication> bundle_adjudications_;

    struct Server;
    std::unique_ptr<Server> server_;
};

}  // namespace taxoforge
