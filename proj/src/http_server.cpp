#include "captune/http_server.hpp"

#include "captune/config_io.hpp"
#include "captune/log.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include <charconv>

namespace captune {

namespace {

using json = nlohmann::json;

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::BadRequest, "request body is not valid JSON", {{"reason", e.what()}});
    }
}

[[noreturn]] void bad_field(const std::string& name, const std::string& reason) {
    throw Error(ErrorCode::BadRequest, fmt::format("{}: {}", name, reason), {{"field", name}});
}

const json* optional_field(const json& body, const char* name) {
    if (!body.is_object()) throw Error(ErrorCode::BadRequest, "request body must be a JSON object");
    auto it = body.find(name);
    return it == body.end() || it->is_null() ? nullptr : &*it;
}

double number(const json& body, const char* name) {
    const json* v = optional_field(body, name);
    if (!v) bad_field(name, "required");
    if (!v->is_number()) bad_field(name, "expected a number");
    return v->get<double>();
}

std::string string_value(const json& body, const char* name) {
    const json* v = optional_field(body, name);
    if (!v) bad_field(name, "required");
    if (!v->is_string()) bad_field(name, "expected a string");
    return v->get<std::string>();
}

std::optional<bool> optional_bool(const json& body, const char* name) {
    const json* v = optional_field(body, name);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) bad_field(name, "expected a boolean");
    return v->get<bool>();
}

// {"detail": d, "expressiveness": e} or [d, e]
ParamPoint point(const json& v, const std::string& name) {
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    if (v.is_object() && v.contains("detail") && v.contains("expressiveness") && v["detail"].is_number() &&
        v["expressiveness"].is_number()) {
        return {v["detail"].get<double>(), v["expressiveness"].get<double>()};
    }
    bad_field(name, "expected {\"detail\": n, \"expressiveness\": n} or [n, n]");
}

int cue_index_key(const std::string& key, const std::string& field) {
    int n = 0;
    auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), n);
    if (ec != std::errc{} || ptr != key.data() + key.size() || n <= 0) bad_field(field + "." + key, "not a cue index");
    return n;
}

int path_int(const std::string& s, const char* what) {
    int n = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), n);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::BadRequest, fmt::format("{} must be an integer", what));
    }
    return n;
}

std::optional<Millis> query_millis(const httplib::Request& req, const char* name) {
    if (!req.has_param(name)) return std::nullopt;
    const std::string v = req.get_param_value(name);
    long long n = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), n);
    if (ec != std::errc{} || ptr != v.data() + v.size() || n < 0) bad_field(name, "expected a non-negative integer");
    return Millis(n);
}

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

} // namespace

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::BadRequest: return 400;
        case ErrorCode::NotFound: return 404;
        case ErrorCode::LockedCue:
        case ErrorCode::NotCalibrated:
        case ErrorCode::AnchorsNotSet: return 409;
        case ErrorCode::MalformedResponse: return 502;
        case ErrorCode::BackendUnavailable:
        case ErrorCode::DescriberUnavailable: return 503;
        default: return 422;
    }
}

struct HttpServer::Impl {
    Service& service;
    std::string cors_origin;
    httplib::Server server;

    Impl(Service& s, std::string origin) : service(s), cors_origin(std::move(origin)) {}

    template <class Fn>
    httplib::Server::Handler wrap(Fn fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const Error& e) {
                send(res, http_status(e.code()),
                     {{"code", to_string(e.code())}, {"message", e.what()}, {"details", e.details()}});
            } catch (const json::exception& e) {
                send(res, 400, {{"code", "BadRequest"}, {"message", e.what()}, {"details", json::object()}});
            } catch (const std::exception& e) {
                log::error("http.internal_error", {{"path", req.path}, {"error", e.what()}});
                send(res, 500, {{"code", "Internal"}, {"message", e.what()}, {"details", json::object()}});
            }
        };
    }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", cors_origin},
                                    {"Access-Control-Allow-Methods", "GET, POST, PUT, PATCH, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.set_logger([](const httplib::Request& req, const httplib::Response& res) {
            log::debug("http.request", {{"method", req.method}, {"path", req.path}, {"status", res.status}});
        });

        server.Get("/healthz", wrap([this](const httplib::Request&, httplib::Response& res) {
            send(res, 200, {{"status", "ok"}, {"backend", service.metrics()["backend"]["kind"]}});
        }));
        server.Get("/metrics", wrap([this](const httplib::Request&, httplib::Response& res) {
            send(res, 200, service.metrics());
        }));

        server.Post("/projects", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            CreateProjectInput in;
            in.srt = string_value(body, "srt");
            if (const json* v = optional_field(body, "source_name")) in.source_name = v->get<std::string>();
            if (const json* m = optional_field(body, "metadata")) {
                in.metadata.title = m->value("title", "");
                in.metadata.genre = m->value("genre", "");
                in.metadata.synopsis = m->value("synopsis", "");
            }
            if (const json* d = optional_field(body, "descriptions")) {
                if (!d->is_object()) bad_field("descriptions", "expected an object keyed by cue index");
                for (const auto& [k, v] : d->items()) {
                    if (!v.is_string()) bad_field("descriptions." + k, "expected a string");
                    in.descriptions[cue_index_key(k, "descriptions")] = v.get<std::string>();
                }
            }
            in.lenient = optional_bool(body, "lenient").value_or(false);
            if (const json* v = optional_field(body, "media_duration_ms")) {
                if (!v->is_number_integer() || v->get<long long>() <= 0) bad_field("media_duration_ms", "expected a positive integer");
                in.media_duration = Millis(v->get<long long>());
            }
            send(res, 201, service.create_project(in));
        }));
        server.Get(R"(/projects/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, service.get_project(req.matches[1]));
        }));
        server.Post(R"(/projects/([^/]+)/calibrate)", wrap([this](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, service.calibrate(req.matches[1]));
        }));
        server.Put(R"(/projects/([^/]+)/anchors)", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            const json* lower = optional_field(body, "lower");
            const json* upper = optional_field(body, "upper");
            if (!lower) bad_field("lower", "required");
            if (!upper) bad_field("upper", "required");
            std::map<int, AnchorTexts> previews;
            if (const json* p = optional_field(body, "previews")) {
                if (!p->is_object()) bad_field("previews", "expected an object keyed by cue index");
                for (const auto& [k, v] : p->items()) {
                    AnchorTexts t;
                    if (v.contains("lower_text")) t.lower_text = v["lower_text"].get<std::string>();
                    if (v.contains("upper_text")) t.upper_text = v["upper_text"].get<std::string>();
                    previews[cue_index_key(k, "previews")] = t;
                }
            }
            send(res, 200, service.set_anchors(req.matches[1], point(*lower, "lower"), point(*upper, "upper"), previews));
        }));
        server.Post(R"(/projects/([^/]+)/preview)", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            PreviewInput in;
            const json* idx = optional_field(body, "cue_index");
            if (!idx || !idx->is_number_integer()) bad_field("cue_index", "expected an integer");
            in.cue_index = idx->get<int>();
            in.slider_detail = number(body, "slider_detail");
            in.slider_expr = number(body, "slider_expr");
            if (const json* a = optional_field(body, "anchor")) in.anchor = a->get<std::string>();
            send(res, 200, service.preview(req.matches[1], in));
        }));
        server.Patch(R"(/projects/([^/]+)/cues/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            std::optional<std::string> text;
            if (const json* t = optional_field(body, "text")) {
                if (!t->is_string()) bad_field("text", "expected a string");
                text = t->get<std::string>();
            }
            send(res, 200,
                 service.edit_cue(req.matches[1], path_int(req.matches[2], "cue index"), text,
                                  optional_bool(body, "locked")));
        }));
        server.Get(R"(/projects/([^/]+)/export)", wrap([this](const httplib::Request& req, httplib::Response& res) {
            res.status = 200;
            res.set_content(export_config(service.export_project(req.matches[1])), "application/json");
        }));

        server.Post("/sessions", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            ProjectConfig config;
            if (const json* id = body.is_object() ? optional_field(body, "project_id") : nullptr) {
                config = service.export_project(id->get<std::string>());
            } else if (const json* c = body.is_object() ? optional_field(body, "config") : nullptr) {
                config = config_from_json(*c);
            } else {
                config = config_from_json(body);
            }
            send(res, 201, service.create_session(config));
        }));
        server.Get(R"(/sessions/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res) {
            send(res, 200, service.get_session(req.matches[1]));
        }));
        server.Put(R"(/sessions/([^/]+)/prefs)", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            PrefsUpdate u;
            if (const json* c = optional_field(body, "cell")) u.cell = point(*c, "cell");
            if (const json* t = optional_field(body, "target")) u.target = point(*t, "target");
            if (const json* r = optional_field(body, "representation")) {
                const auto mode = r->is_string() ? parse_representation(r->get<std::string>()) : std::nullopt;
                if (!mode) bad_field("representation", "expected default, source_focused, onomatopoeia or sensory_quality");
                u.representation = mode;
            }
            u.genre_aligned = optional_bool(body, "genre_aligned");
            send(res, 200, service.set_prefs(req.matches[1], u));
        }));
        server.Post(R"(/sessions/([^/]+)/chat)", wrap([this](const httplib::Request& req, httplib::Response& res) {
            const json body = parse_body(req);
            send(res, 200, service.chat(req.matches[1], string_value(body, "utterance")));
        }));
        server.Get(R"(/sessions/([^/]+)/captions)", wrap([this](const httplib::Request& req, httplib::Response& res) {
            send(res, 200,
                 service.get_captions(req.matches[1], query_millis(req, "from_ms"), query_millis(req, "to_ms")));
        }));
    }
};

HttpServer::HttpServer(Service& service, std::string cors_origin)
    : impl_(std::make_unique<Impl>(service, std::move(cors_origin))) {
    impl_->routes();
}

HttpServer::~HttpServer() {
    stop();
}

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() {
    return impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

void HttpServer::wait_until_ready() const {
    impl_->server.wait_until_ready();
}

} // namespace captune
