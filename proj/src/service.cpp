#include "taxoforge/service.hpp"

#include <chrono>
#include <ctime>
#include <thread>

#include <httplib.h>

#include "taxoforge/bundle.hpp"

namespace taxoforge {

namespace {

constexpr const char* kMethodNotAllowed = "method_not_allowed";
constexpr const char* kInternal = "internal";

const std::vector<std::pair<std::string, int>>& catalog() {
    static const std::vector<std::pair<std::string, int>> c = {
        {errc::unknown_session, 404},  {errc::unknown_node, 404},      {errc::not_found, 404},
        {kMethodNotAllowed, 405},      {errc::stale_revision, 409},    {errc::wrong_cursor, 409},
        {errc::session_done, 409},     {errc::nothing_to_undo, 409},   {errc::invalid_payload, 422},
        {errc::syntax, 422},           {errc::format, 422},            {errc::draft_violation, 422},
        {errc::unknown_condition, 422}, {errc::duplicate_id, 422},     {errc::unknown_parent, 422},
        {errc::cycle, 422},            {errc::illegal_fields, 422},    {errc::duplicate_label, 422},
        {errc::unknown_label, 422},    {errc::directive, 422},         {errc::duplicate_pair, 422},
        {errc::context, 422},          {errc::dataset_mismatch, 422},  {errc::version_mismatch, 422},
        {errc::empty_queue, 422},      {errc::empty_labels, 422},      {errc::empty_classes, 422},
        {errc::bad_value, 422},        {errc::out_of_range, 422},      {errc::unknown_category, 422},
        {errc::missing_column, 422},   {errc::empty_votes, 422},       {errc::checksum, 500},
        {errc::io, 500},               {kInternal, 500}};
    return c;
}

ApiResponse json_response(int status, const Json& j) {
    ApiResponse r;
    r.status = status;
    r.body = dump(j);
    return r;
}

ApiResponse error_response(const std::string& code, const std::string& message, const std::string& ref = {}) {
    int status = http_status(code);
    Json e{{"status", status}, {"code", code}, {"message", message}};
    e["ref"] = ref.empty() ? Json(nullptr) : Json(ref);
    return json_response(status, Json{{"error", e}});
}

void set_revision(ApiResponse& r, std::size_t rev) {
    r.headers["X-Revision"] = std::to_string(rev);
    r.headers["ETag"] = "\"" + std::to_string(rev) + "\"";
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
        if (c == '/') {
            if (!cur.empty()) parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

std::string now_utc() {
    std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Json parse_body(const std::string& body) {
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) return Json::object();
    Json j = parse_json(body, "request body");
    if (!j.is_object()) throw Error(errc::invalid_payload, "request body must be a JSON object");
    return j;
}

std::string query(const ApiRequest& req, const std::string& key, const std::string& fallback = {}) {
    auto it = req.query.find(key);
    return it == req.query.end() ? fallback : it->second;
}

MetricsOptions metrics_options(const ApiRequest& req) {
    MetricsOptions o;
    o.scope = parse_association_scope(query(req, "scope", "explicit_and_inferred"));
    o.class_scope = parse_class_scope(query(req, "class_scope", "all"));
    std::string p = query(req, "precision", "2");
    try {
        std::size_t used = 0;
        o.precision = std::stoi(p, &used);
        if (used != p.size()) throw std::invalid_argument(p);
    } catch (const std::exception&) {
        throw Error(errc::invalid_payload, "precision must be an integer");
    }
    return o;
}

std::size_t require_revision(const Json& body) {
    auto it = body.find("revision");
    if (it == body.end() || !it->is_number_unsigned())
        throw Error(errc::invalid_payload, "mutations must carry the non-negative integer \"revision\" last seen");
    return it->get<std::size_t>();
}

}  // namespace

int http_status(const std::string& code) {
    for (const auto& [c, s] : catalog())
        if (c == code) return s;
    return 422;
}

Json error_catalog() {
    Json j = Json::array();
    for (const auto& [c, s] : catalog()) j.push_back(Json{{"code", c}, {"status", s}});
    return j;
}

struct Service::Server {
    httplib::Server svr;
    std::thread thread;
};

Service::Service(Taxonomy bundle_taxonomy, Crosswalk bundle_crosswalk)
    : bundle_taxonomy_(std::move(bundle_taxonomy)), bundle_crosswalk_(std::move(bundle_crosswalk)) {}

Service::~Service() { stop(); }

std::shared_ptr<Service::Slot> Service::find_session(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(errc::unknown_session, "unknown session " + id, id);
    return it->second;
}

ApiResponse Service::handle(const ApiRequest& req) {
    try {
        return route(req);
    } catch (const Error& e) {
        return error_response(e.code(), e.what(), e.ref());
    } catch (const nlohmann::json::exception& e) {
        return error_response(errc::invalid_payload, e.what());
    } catch (const std::exception& e) {
        return error_response(kInternal, e.what());
    }
}

ApiResponse Service::route(const ApiRequest& req) {
    auto parts = split_path(req.path);
    const bool get = req.method == "GET", post = req.method == "POST";
    auto only = [&](bool ok) {
        if (!ok) throw Error(kMethodNotAllowed, req.method + " is not allowed on " + req.path);
    };
    if (parts.size() == 1 && parts[0] == "errors") {
        only(get);
        return json_response(200, Json{{"errors", error_catalog()}});
    }
    if (parts.size() == 1 && (parts[0] == "taxonomy" || parts[0] == "crosswalk")) {
        only(get);
        std::string sid = query(req, "session");
        Json out;
        std::size_t rev = 0;
        if (sid.empty()) {
            out = parts[0] == "taxonomy" ? taxonomy_to_json(bundle_taxonomy_)
                                         : crosswalk_to_json(bundle_crosswalk_, bundle_taxonomy_);
        } else {
            auto slot = find_session(sid);
            std::lock_guard lock(slot->mu);
            const Session& s = slot->session;
            out = parts[0] == "taxonomy" ? taxonomy_to_json(s.taxonomy) : crosswalk_to_json(session_crosswalk(s), s.taxonomy);
            rev = s.revision;
        }
        ApiResponse r = json_response(200, out);
        if (!sid.empty()) set_revision(r, rev);
        return r;
    }
    if (parts.size() == 1 && parts[0] == "metrics") {
        only(get);
        return metrics(req);
    }
    if (parts.size() == 1 && parts[0] == "orthogonality") {
        only(get);
        return orthogonality(req);
    }
    if (parts.size() == 2 && parts[0] == "orthogonality" && parts[1] == "adjudications") {
        only(post);
        return adjudicate(req);
    }
    if (!parts.empty() && parts[0] == "sessions") {
        if (parts.size() == 1) {
            only(post);
            return create_session(req);
        }
        auto slot = find_session(parts[1]);
        if (parts.size() == 2 || (parts.size() == 3 && (parts[2] == "summary" || parts[2] == "next" || parts[2] == "ending"))) {
            only(get);
            std::lock_guard lock(slot->mu);
            const Session& s = slot->session;
            Json out;
            if (parts.size() == 2)
                out = snapshot_to_json(s);
            else if (parts[2] == "summary")
                out = session_summary(s);
            else if (parts[2] == "next")
                out = prompt_to_json(next_label(s));
            else
                out = ending_to_json(check_ending(s));
            ApiResponse r = json_response(200, out);
            set_revision(r, s.revision);
            return r;
        }
        if (parts.size() == 3 && (parts[2] == "decisions" || parts[2] == "attestations" || parts[2] == "undo")) {
            only(post);
            return mutate(slot, parts[2], req);
        }
    }
    throw Error(errc::not_found, "no resource at " + req.path);
}

ApiResponse Service::create_session(const ApiRequest& req) {
    Json body = parse_body(req.body);
    std::string id;
    {
        std::lock_guard lock(mu_);
        id = "s" + std::to_string(next_id_++);
    }
    Session s;
    if (auto snap = body.find("snapshot"); snap != body.end()) {
        s = snapshot_from_json(*snap);
    } else {
        QueueOrder order = QueueOrder::ReverseChronological;
        if (auto o = optional_string(body, "order", "session options"); o == "as_given")
            order = QueueOrder::AsGiven;
        else if (!o.empty() && o != "reverse_chronological")
            throw Error(errc::invalid_payload, "order must be \"reverse_chronological\" or \"as_given\"");
        std::vector<DatasetDescriptor> ds;
        if (auto d = body.find("descriptors"); d != body.end()) {
            if (!d->is_array()) throw Error(errc::invalid_payload, "descriptors must be an array");
            for (const auto& x : *d) ds.push_back(descriptor_from_json(x));
        } else if (auto d = body.find("datasets"); d != body.end()) {
            if (!d->is_array()) throw Error(errc::invalid_payload, "datasets must be an array of ids");
            for (const auto& x : *d) {
                std::string want = x.get<std::string>();
                auto it = std::find_if(bundle_crosswalk_.descriptors.begin(), bundle_crosswalk_.descriptors.end(),
                                       [&](const DatasetDescriptor& dd) { return dd.dataset_id == want; });
                if (it == bundle_crosswalk_.descriptors.end())
                    throw Error(errc::invalid_payload, "no bundled dataset " + want, want);
                ds.push_back(*it);
            }
        } else {
            ds = bundle_crosswalk_.descriptors;
        }
        Taxonomy t0(bundle_taxonomy_.name(), bundle_taxonomy_.version(), {});
        if (auto t = body.find("initial_taxonomy"); t != body.end()) t0 = taxonomy_from_json(*t);
        std::string meta = optional_string(body, "meta_characteristic", "session options");
        if (meta.empty()) meta = bundle_info().value("meta_characteristic", "");
        s = start_session(t0, std::move(ds), order, id, meta);
    }
    s.session_id = id;
    s.revision = 0;
    auto slot = std::make_shared<Slot>();
    slot->session = std::move(s);
    ApiResponse r = json_response(201, session_summary(slot->session));
    set_revision(r, 0);
    r.headers["Location"] = "/sessions/" + id;
    std::lock_guard lock(mu_);
    sessions_[id] = std::move(slot);
    return r;
}

ApiResponse Service::mutate(const std::shared_ptr<Slot>& slot, const std::string& action, const ApiRequest& req) {
    Json body = parse_body(req.body);
    std::size_t seen = require_revision(body);
    std::lock_guard lock(slot->mu);
    Session& cur = slot->session;
    if (seen != cur.revision)
        throw Error(errc::stale_revision,
                    "revision " + std::to_string(seen) + " is stale, session is at " + std::to_string(cur.revision));
    Session next;
    if (action == "decisions") {
        Json d = body.contains("decision") ? body["decision"] : body;
        Decision dec;
        try {
            dec = decision_from_json(d);
        } catch (const Error& e) {
            throw Error(e.code() == errc::format || e.code() == errc::syntax ? errc::invalid_payload : e.code(), e.what(),
                        e.ref());
        }
        if (dec.timestamp.empty()) dec.timestamp = now_utc();
        next = decide(cur, dec);
    } else if (action == "attestations") {
        Attest a;
        try {
            a = attest_from_json(body);
        } catch (const Error& e) {
            throw Error(e.code() == errc::format ? errc::invalid_payload : e.code(), e.what(), e.ref());
        }
        if (a.timestamp.empty()) a.timestamp = now_utc();
        next = attest(cur, a);
    } else {
        next = undo(cur);
    }
    cur = std::move(next);
    Json out;
    out["revision"] = cur.revision;
    out["entry"] = action == "undo" || cur.log.empty() ? Json(nullptr) : log_entry_to_json(cur.log.back());
    out["next"] = prompt_to_json(next_label(cur));
    out["ending"] = ending_to_json(check_ending(cur));
    ApiResponse r = json_response(200, out);
    set_revision(r, cur.revision);
    return r;
}

ApiResponse Service::metrics(const ApiRequest& req) {
    MetricsOptions o = metrics_options(req);
    std::string sid = query(req, "session");
    if (sid.empty()) return json_response(200, metrics_to_json(report(bundle_crosswalk_, bundle_taxonomy_, o)));
    auto slot = find_session(sid);
    Crosswalk x;
    Taxonomy t;
    std::size_t rev;
    {
        std::lock_guard lock(slot->mu);
        x = session_crosswalk(slot->session);
        t = slot->session.taxonomy;
        rev = slot->session.revision;
    }
    ApiResponse r = json_response(200, metrics_to_json(report(x, t, o)));
    set_revision(r, rev);
    return r;
}

ApiResponse Service::orthogonality(const ApiRequest& req) {
    AssociationScope scope = parse_association_scope(query(req, "scope", "explicit_and_inferred"));
    std::string format = query(req, "format", "json");
    if (format != "json" && format != "csv") throw Error(errc::invalid_payload, "format must be json or csv");
    std::string sid = query(req, "session");
    OrthogonalityMatrix prev;
    Crosswalk x;
    Taxonomy t;
    if (sid.empty()) {
        std::lock_guard lock(mu_);
        prev.adjudications = bundle_adjudications_;
        x = bundle_crosswalk_;
        t = bundle_taxonomy_;
    } else {
        auto slot = find_session(sid);
        std::lock_guard lock(slot->mu);
        prev.adjudications = slot->adjudications;
        x = session_crosswalk(slot->session);
        t = slot->session.taxonomy;
    }
    OrthogonalityMatrix m = taxoforge::orthogonality(x, t, scope, &prev);
    if (format == "csv") {
        ApiResponse r;
        r.content_type = "text/csv";
        r.body = orthogonality_to_csv(m);
        return r;
    }
    return json_response(200, orthogonality_to_json(m, t));
}

ApiResponse Service::adjudicate(const ApiRequest& req) {
    Json body = parse_body(req.body);
    std::string a = require_string(body, "a", "adjudication"), b = require_string(body, "b", "adjudication");
    Adjudication adj{require_string(body, "verdict", "adjudication"), optional_string(body, "by", "adjudication"),
                     optional_string(body, "note", "adjudication")};
    std::string sid = optional_string(body, "session", "adjudication");
    auto check = [&](const Taxonomy& t) {
        for (const auto* c : {&a, &b})
            if (!t.contains(*c)) throw Error(errc::unknown_node, "unknown class " + *c, *c);
        if (adj.verdict != "orthogonal" && adj.verdict != "dependent")
            throw Error(errc::invalid_payload, "adjudication verdict must be \"orthogonal\" or \"dependent\"");
    };
    Json out = Json::array();
    auto list = [&](const std::map<std::pair<std::string, std::string>, Adjudication>& m) {
        for (const auto& [k, v] : m)
            out.push_back(Json{{"a", k.first}, {"b", k.second}, {"verdict", v.verdict}, {"by", v.by}, {"note", v.note}});
    };
    if (sid.empty()) {
        check(bundle_taxonomy_);
        std::lock_guard lock(mu_);
        bundle_adjudications_[{a, b}] = adj;
        list(bundle_adjudications_);
    } else {
        auto slot = find_session(sid);
        std::lock_guard lock(slot->mu);
        check(slot->session.taxonomy);
        slot->adjudications[{a, b}] = adj;
        list(slot->adjudications);
    }
    return json_response(200, Json{{"adjudications", out}});
}

namespace {

void bind_routes(httplib::Server& svr, Service& service) {
    auto h = [&service](const httplib::Request& req, httplib::Response& res) {
        ApiRequest ar{req.method, req.path, {}, req.body};
        for (const auto& [k, v] : req.params) ar.query.emplace(k, v);
        ApiResponse r = service.handle(ar);
        res.status = r.status;
        for (const auto& [k, v] : r.headers) res.set_header(k, v);
        res.set_content(r.body, r.content_type);
    };
    svr.Get(".*", h);
    svr.Post(".*", h);
    svr.Put(".*", h);
    svr.Delete(".*", h);
}

}  // namespace

void Service::serve(const std::string& host, int port, const std::string& static_dir) {
    server_ = std::make_unique<Server>();
    if (!static_dir.empty() && !server_->svr.set_mount_point("/ui", static_dir))
        throw Error(errc::io, "cannot serve static files from " + static_dir, static_dir);
    bind_routes(server_->svr, *this);
    if (!server_->svr.listen(host, port))
        throw Error(errc::io, "cannot listen on " + host + ":" + std::to_string(port));
}

int Service::serve_background(const std::string& host) {
    server_ = std::make_unique<Server>();
    bind_routes(server_->svr, *this);
    int port = server_->svr.bind_to_any_port(host);
    if (port < 0) throw Error(errc::io, "cannot bind on " + host);
    server_->thread = std::thread([this] { server_->svr.listen_after_bind(); });
    server_->svr.wait_until_ready();
    return port;
}

void Service::stop() {
    if (!server_) return;
    server_->svr.stop();
    if (server_->thread.joinable()) server_->thread.join();
    server_.reset();
}

}  // namespace taxoforge
