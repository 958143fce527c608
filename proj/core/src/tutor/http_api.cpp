#include "activeteach/tutor/http_api.hpp"

#include <httplib.h>

#include <json.hpp>

namespace activeteach::tutor {

using nlohmann::json;

namespace {

int status_for(ServiceError::Code code) {
    using C = ServiceError::Code;
    switch (code) {
        case C::BadRequest: return 400;
        case C::Unauthorized: return 401;
        case C::NotFound: return 404;
        default: return 409;
    }
}

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& msg) {
    send(res, status, json{{"error", code}, {"message", msg}});
}

json question_json(const Question& q) {
    json j{{"arm", q.arm},
           {"phase", to_string(q.phase)},
           {"trial", q.trial},
           {"session", q.session},
           {"item", q.item_id},
           {"prompt", q.prompt},
           {"choices", q.choices},
           {"first_presentation", q.first_presentation},
           {"answered_in_session", q.answered_in_session},
           {"quota", q.quota}};
    j["answer"] = q.answer ? json(*q.answer) : json(nullptr);
    return j;
}

json ack_json(const AnswerAck& a) {
    return json{{"correct", a.correct},
                {"correct_answer", a.correct_answer},
                {"answered", a.answered_in_session},
                {"complete", a.session_complete}};
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

const json& body_of(const httplib::Request& req, json& storage) {
    try {
        storage = req.body.empty() ? json::object() : json::parse(req.body);
    } catch (const json::parse_error&) {
        throw ServiceError(ServiceError::Code::BadRequest, "request body is not valid JSON");
    }
    if (!storage.is_object()) {
        throw ServiceError(ServiceError::Code::BadRequest, "request body must be a JSON object");
    }
    return storage;
}

template <class T>
T required(const json& body, const char* key) {
    if (!body.contains(key)) {
        throw ServiceError(ServiceError::Code::BadRequest, std::string("missing field '") + key + "'");
    }
    try {
        return body.at(key).get<T>();
    } catch (const json::exception&) {
        throw ServiceError(ServiceError::Code::BadRequest, std::string("field '") + key + "' has the wrong type");
    }
}

}  // namespace

struct HttpApi::Impl {
    TutorService& service;
    httplib::Server server;

    explicit Impl(TutorService& s) : service(s) {
        // No SO_REUSEPORT: a second server on the same port must fail to bind.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
        });
    }

    Seconds now_of(const httplib::Request& req) const {
        if (service.config().allow_time_override && req.has_header("X-Debug-Now")) {
            const auto text = req.get_header_value("X-Debug-Now");
            try {
                std::size_t used = 0;
                const double t = std::stod(text, &used);
                if (used == text.size()) return t;
            } catch (const std::exception&) {
            }
            throw ServiceError(ServiceError::Code::BadRequest, "X-Debug-Now must be a number");
        }
        return service.now();
    }

    void authorize(const httplib::Request& req, const std::string& user) const {
        service.authenticate(user, req.get_header_value("X-User-Token"));
    }

    /// Runs `fn`, translating errors into JSON responses.
    template <class Fn>
    httplib::Server::Handler wrap(Fn fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const ServiceError& e) {
                send_error(res, status_for(e.code()), to_string(e.code()), e.what());
            } catch (const VocabularyError& e) {
                send_error(res, 400, "bad_request", e.what());
            } catch (const std::exception& e) {
                send_error(res, 500, "internal", e.what());
            }
        };
    }

    static int arm_param(const httplib::Request& req) {
        const auto& text = req.matches[2].str();
        if (text != "0" && text != "1") {
            throw ServiceError(ServiceError::Code::NotFound, "arm must be 0 or 1");
        }
        return text[0] - '0';
    }

    void routes() {
        server.Get("/health", wrap([this](const httplib::Request&, httplib::Response& res) {
            send(res, 200, json{{"status", "ok"}, {"vocabulary", service.vocabulary_size()}});
        }));

        server.Post("/users", wrap([this](const httplib::Request& req, httplib::Response& res) {
            json storage;
            const auto& body = body_of(req, storage);
            NewUser request;
            if (body.contains("id")) request.id = required<std::string>(body, "id");
            if (body.contains("start")) request.start = required<double>(body, "start");
            if (body.contains("planner")) request.planner = required<std::string>(body, "planner");
            if (!request.start) request.start = now_of(req);
            const auto created = service.create_user(request);
            send(res, 201, json{{"id", created.id},
                                {"token", created.token},
                                {"planner", created.planner},
                                {"start", created.start}});
        }));

        server.Get(R"(/users/([A-Za-z0-9_-]+)/schedule)",
                   wrap([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string user = req.matches[1];
                       authorize(req, user);
                       const auto s = service.schedule(user, now_of(req));
                       json sessions = json::array();
                       for (const auto& slot : s.sessions) {
                           sessions.push_back(json{{"day", slot.day},
                                                   {"arm", slot.arm},
                                                   {"opens_at", slot.opens_at},
                                                   {"answered", slot.answered}});
                       }
                       send(res, 200,
                            json{{"start", s.start},
                                 {"training_days", s.training_days},
                                 {"session_questions", s.session_questions},
                                 {"evaluation_opens_at", s.evaluation_opens_at},
                                 {"current_day", s.current_day ? json(*s.current_day) : json(nullptr)},
                                 {"sessions", sessions}});
                   }));

        server.Get(R"(/users/([A-Za-z0-9_-]+)/arms/(\d+)/next)",
                   wrap([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string user = req.matches[1];
                       authorize(req, user);
                       send(res, 200, question_json(service.next_question(user, arm_param(req), now_of(req))));
                   }));

        server.Post(R"(/users/([A-Za-z0-9_-]+)/arms/(\d+)/answer)",
                    wrap([this](const httplib::Request& req, httplib::Response& res) {
                        const std::string user = req.matches[1];
                        authorize(req, user);
                        json storage;
                        const auto& body = body_of(req, storage);
                        const auto ack = service.submit_answer(
                            user, arm_param(req), required<std::uint32_t>(body, "trial"),
                            required<std::string>(body, "item"), required<std::string>(body, "choice"),
                            now_of(req));
                        send(res, 200, ack_json(ack));
                    }));

        server.Get(R"(/users/([A-Za-z0-9_-]+)/arms/(\d+)/evaluation/next)",
                   wrap([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string user = req.matches[1];
                       authorize(req, user);
                       send(res, 200,
                            question_json(service.next_evaluation_question(user, arm_param(req), now_of(req))));
                   }));

        server.Post(R"(/users/([A-Za-z0-9_-]+)/arms/(\d+)/evaluation/answer)",
                    wrap([this](const httplib::Request& req, httplib::Response& res) {
                        const std::string user = req.matches[1];
                        authorize(req, user);
                        json storage;
                        const auto& body = body_of(req, storage);
                        const auto ack = service.submit_evaluation_answer(
                            user, arm_param(req), required<std::uint32_t>(body, "trial"),
                            required<std::string>(body, "item"), required<std::string>(body, "choice"),
                            now_of(req));
                        send(res, 200, ack_json(ack));
                    }));

        server.Get(R"(/users/([A-Za-z0-9_-]+)/arms/(\d+)/evaluation)",
                   wrap([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string user = req.matches[1];
                       authorize(req, user);
                       const auto r = service.evaluation(user, arm_param(req));
                       json verdicts = json::array();
                       for (const auto& v : r.verdicts) {
                           verdicts.push_back(json{{"item", v.item_id},
                                                   {"responses", v.responses},
                                                   {"learned", v.learned}});
                       }
                       send(res, 200, json{{"complete", r.complete},
                                           {"answered", r.answered},
                                           {"total", r.total},
                                           {"n_learned", r.n_learned},
                                           {"n_seen", r.n_seen},
                                           {"ratio", optional_json(r.ratio)},
                                           {"verdicts", verdicts}});
                   }));

        server.Get(R"(/users/([A-Za-z0-9_-]+)/stats)",
                   wrap([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string user = req.matches[1];
                       authorize(req, user);
                       json arms = json::array();
                       for (const auto& s : service.stats(user)) {
                           json estimates = json::array();
                           for (const auto& e : s.estimates) {
                               estimates.push_back(json{{"item", e.item_id}, {"alpha", e.alpha}, {"beta", e.beta}});
                           }
                           json eval = nullptr;
                           if (s.evaluation) {
                               eval = json{{"n_learned", s.evaluation->n_learned},
                                           {"n_seen", s.evaluation->n_seen},
                                           {"completed_at", s.evaluation->completed_at}};
                           }
                           arms.push_back(json{{"arm", s.arm},
                                               {"teacher", s.teacher},
                                               {"answered", s.n_answered},
                                               {"n_seen", s.n_seen},
                                               {"evaluation", eval},
                                               {"estimates", estimates}});
                       }
                       send(res, 200, json{{"user", user}, {"arms", arms}});
                   }));
    }
};

HttpApi::HttpApi(TutorService& service) : impl_(std::make_unique<Impl>(service)) {
    impl_->server.new_task_queue = [n = service.config().http_threads] {
        return new httplib::ThreadPool(static_cast<std::size_t>(n));
    };
    impl_->routes();
}

HttpApi::~HttpApi() { stop(); }

int HttpApi::bind(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) {
        throw Error("cannot listen on " + host + ":" + std::to_string(port));
    }
    return bound;
}

void HttpApi::run() { impl_->server.listen_after_bind(); }

void HttpApi::stop() {
    if (impl_->server.is_running()) impl_->server.stop();
}

void HttpApi::wait_until_ready() const { impl_->server.wait_until_ready(); }

}  // namespace activeteach::tutor
