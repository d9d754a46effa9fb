#include "promptassist/api_service.hpp"

#include <dirent.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>

#include <algorithm>
#include <condition_variable>
#include <cstdlib>
#include <map>
#include <mutex>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>

#include "promptassist/json_io.hpp"
#include "promptassist/suggestion_service.hpp"
#include "promptassist/text.hpp"

namespace promptassist::api {

using nlohmann::json;

ApiError map_error(ErrorCode code, bool production) {
    switch (code) {
    case ErrorCode::ArityMismatch:
    case ErrorCode::EmptyInput:
    case ErrorCode::EmptyList:
    case ErrorCode::InvalidRequest:
    case ErrorCode::InvalidQuery:
        return {"invalid_request", "This request is missing information or contains values that cannot be used.",
                false, 400};
    case ErrorCode::InvalidTemplate:
        return {"invalid_template", "The suggestion templates are misconfigured, so no suggestions can be made.",
                false, 500};
    case ErrorCode::NoSuggestions:
        return {"no_suggestions", "No suggestions could be found this time. Please try again or type your own.",
                true, 422};
    case ErrorCode::BackendUnavailable:
        return {"backend_unavailable", "The suggestion service is not reachable right now. Please try again later.",
                true, 503};
    case ErrorCode::Timeout:
        return {"timeout", "Suggestions took too long to arrive. Please try again.", true, 504};
    case ErrorCode::Cancelled:
        return {"cancelled", "The request was cancelled before it finished.", true, 499};
    case ErrorCode::MissingFixture:
        if (production) {
            return {"backend_unavailable",
                    "The suggestion service is not reachable right now. Please try again later.", true, 503};
        }
        return {"missing_fixture", "No recorded completion exists for this request.", false, 500};
    case ErrorCode::RecordingDisabled:
        return {"recording_disabled", "The server is not allowed to record new completions.", false, 500};
    case ErrorCode::WrongStep:
        return {"wrong_step", "That action does not belong to the current step. Please reload and try again.", false,
                409};
    case ErrorCode::SkipNotAllowed:
        return {"skip_not_allowed", "This step cannot be skipped. Please choose or type a scene.", false, 409};
    case ErrorCode::EmptyPayload:
        return {"empty_payload", "Please type or choose something before continuing.", false, 400};
    case ErrorCode::NoScene:
    case ErrorCode::EmptyPrompt:
        return {"no_scene", "Your prompt needs a scene before it can be finished.", false, 404};
    case ErrorCode::WordNotFound:
        return {"word_not_found", "The word you chose to replace is not in the scene.", false, 422};
    case ErrorCode::NotFound:
        return {"not_found", "The requested item does not exist.", false, 404};
    case ErrorCode::SchemaMismatch:
        return {"unsupported_record", "This saved session was written by a different version and cannot be opened.",
                false, 500};
    case ErrorCode::CorruptRecord:
        return {"corrupt_record", "This saved session is damaged and cannot be opened.", false, 500};
    case ErrorCode::StorageFull:
        return {"storage_full", "The server is out of storage space, so your change was not saved.", true, 507};
    case ErrorCode::SerializationFailure:
        return {"save_failed", "Your change could not be saved. Please try again.", true, 500};
    case ErrorCode::InvalidConfig:
        return {"invalid_config", "The server is misconfigured and cannot handle this request.", false, 500};
    case ErrorCode::IoError:
        return {"io_error", "The server could not read or write its files. Please try again.", true, 500};
    }
    return {"internal_error", "Something went wrong on the server. Please try again.", true, 500};
}

ApiError map_exception(std::exception_ptr error, bool production) {
    try {
        if (error) std::rethrow_exception(error);
    } catch (const Error& e) {
        return map_error(e.code(), production);
    } catch (...) {
    }
    return {"internal_error", "Something went wrong on the server. Please try again.", true, 500};
}

json to_json(const ApiError& error) {
    return {{"code", error.code}, {"message", error.message}, {"retriable", error.retriable}};
}

namespace {

ApiError exhausted_error(std::size_t found) {
    std::string message = found == 1 ? "Only 1 suggestion was found." : "Only " + std::to_string(found) +
                                                                             " suggestions were found.";
    message += " You can ask for more or type your own.";
    return {"exhausted_suggestions", message, true, 422};
}

Response error_response(const ApiError& e) { return {e.http_status, json{{"error", to_json(e)}}}; }

[[noreturn]] void bad_request(const std::string& what) { throw Error(ErrorCode::InvalidRequest, what); }

json parse_body(std::string_view body) {
    if (text::trim(body).empty()) return json::object();
    json doc;
    try {
        doc = json::parse(body);
    } catch (const json::exception&) {
        bad_request("request body is not valid JSON");
    }
    if (!doc.is_object()) bad_request("request body must be a JSON object");
    return doc;
}

std::string string_field(const json& body, const char* name) {
    auto it = body.find(name);
    if (it == body.end() || it->is_null()) return {};
    if (!it->is_string()) bad_request(std::string(name) + " must be a string");
    return it->get<std::string>();
}

std::vector<std::string> string_list(const json& body, const char* name) {
    std::vector<std::string> out;
    auto it = body.find(name);
    if (it == body.end() || it->is_null()) return out;
    if (!it->is_array()) bad_request(std::string(name) + " must be a list of strings");
    for (const auto& v : *it) {
        if (!v.is_string()) bad_request(std::string(name) + " must be a list of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

std::vector<std::string> split_path(std::string_view path) {
    if (auto q = path.find('?'); q != std::string_view::npos) path = path.substr(0, q);
    std::vector<std::string> parts;
    std::size_t i = 0;
    while (i < path.size()) {
        auto j = path.find('/', i);
        if (j == std::string_view::npos) j = path.size();
        if (j > i) parts.emplace_back(path.substr(i, j - i));
        i = j + 1;
    }
    return parts;
}

int port_of(const sockaddr_storage& addr) {
    if (addr.ss_family == AF_INET) return ntohs(reinterpret_cast<const sockaddr_in&>(addr).sin_port);
    if (addr.ss_family == AF_INET6) return ntohs(reinterpret_cast<const sockaddr_in6&>(addr).sin6_port);
    return -1;
}

// The connected socket serving a request, found by its port pair. -1 when it
// cannot be identified.
int find_connection_fd(int local_port, int remote_port) {
    if (local_port <= 0 || remote_port <= 0) return -1;
    DIR* dir = opendir("/proc/self/fd");
    if (!dir) return -1;
    int found = -1;
    while (dirent* entry = readdir(dir)) {
        char* end = nullptr;
        long fd = std::strtol(entry->d_name, &end, 10);
        if (end == entry->d_name || *end != '\0') continue;
        sockaddr_storage local{}, peer{};
        socklen_t local_len = sizeof(local), peer_len = sizeof(peer);
        if (getsockname(static_cast<int>(fd), reinterpret_cast<sockaddr*>(&local), &local_len) != 0) continue;
        if (port_of(local) != local_port) continue;
        if (getpeername(static_cast<int>(fd), reinterpret_cast<sockaddr*>(&peer), &peer_len) != 0) continue;
        if (port_of(peer) != remote_port) continue;
        found = static_cast<int>(fd);
        break;
    }
    closedir(dir);
    return found;
}

bool peer_closed(int fd) {
    pollfd p{fd, static_cast<short>(POLLIN | POLLRDHUP), 0};
    if (poll(&p, 1, 0) <= 0) return false;
    if (p.revents & (POLLRDHUP | POLLHUP | POLLERR | POLLNVAL)) return true;
    if (p.revents & POLLIN) {
        char c;
        return recv(fd, &c, 1, MSG_PEEK | MSG_DONTWAIT) == 0;
    }
    return false;
}

}  // namespace

struct ApiService::Impl {
    struct Slot {
        std::mutex mutex;
        Session session;
        std::unique_ptr<SuggestionService> suggestions;
    };

    Engine engine;
    std::shared_ptr<SessionStore> store;
    Wizard wizard;
    ApiOptions options;

    std::mutex slots_mutex;
    std::map<std::string, std::shared_ptr<Slot>> slots;

    httplib::Server server;
    std::thread server_thread;

    Impl(Engine e, std::shared_ptr<SessionStore> s, Wizard w, ApiOptions o)
        : engine(std::move(e)), store(std::move(s)), wizard(std::move(w)), options(std::move(o)) {}

    std::shared_ptr<Slot> make_slot(Session session) {
        auto slot = std::make_shared<Slot>();
        slot->session = std::move(session);
        slot->suggestions = std::make_unique<SuggestionService>(engine.client, engine.suggestion);
        return slot;
    }

    std::shared_ptr<Slot> find(const std::string& id) {
        std::lock_guard guard(slots_mutex);
        if (auto it = slots.find(id); it != slots.end()) return it->second;
        if (!store) throw Error(ErrorCode::NotFound, "no session " + id);
        auto slot = make_slot(store->load(id));
        slots.emplace(id, slot);
        return slot;
    }

    void persist(const Session& session) {
        if (store) store->save(session);
    }

    Response create_session() {
        Session session = wizard.create_session();
        persist(session);
        auto body = json_io::to_json(session);
        auto id = session.id;
        std::lock_guard guard(slots_mutex);
        slots[id] = make_slot(std::move(session));
        return {201, std::move(body)};
    }

    Response list_sessions() {
        std::vector<SessionSummary> summaries;
        if (store) {
            summaries = store->list_sessions();
        } else {
            std::vector<std::shared_ptr<Slot>> all;
            {
                std::lock_guard guard(slots_mutex);
                for (const auto& [id, slot] : slots) all.push_back(slot);
            }
            for (const auto& slot : all) {
                std::lock_guard guard(slot->mutex);
                const auto& s = slot->session;
                summaries.push_back({s.id, s.updated, compose_prompt(s, wizard.options().assembly).value_or("")});
            }
            std::sort(summaries.begin(), summaries.end(), [](const SessionSummary& a, const SessionSummary& b) {
                if (a.updated != b.updated) return a.updated > b.updated;
                return a.id < b.id;
            });
        }
        auto list = json::array();
        for (const auto& s : summaries) {
            list.push_back({{"id", s.id}, {"updated_at_ms", s.updated}, {"preview", s.preview}});
        }
        return {200, json{{"sessions", std::move(list)}}};
    }

    Response get_session(const std::string& id) {
        auto slot = find(id);
        std::lock_guard guard(slot->mutex);
        return {200, json_io::to_json(slot->session)};
    }

    Response get_prompt(const std::string& id) {
        auto slot = find(id);
        Session copy;
        {
            std::lock_guard guard(slot->mutex);
            copy = slot->session;
        }
        // Reading the prompt must not log an event; assemble on a copy.
        return {200, json_io::to_json(wizard.assemble(copy))};
    }

    Response suggest(const std::string& id, const json& body, std::stop_token cancel) {
        auto slot = find(id);
        Session snapshot;
        {
            std::lock_guard guard(slot->mutex);
            snapshot = slot->session;
        }

        auto step_name = string_field(body, "step");
        auto kind = parse_suggestion_kind(step_name);
        if (!kind) bad_request("unknown suggestion step \"" + step_name + "\"");

        SuggestionQuery query;
        query.kind = *kind;
        query.exclude = string_list(body, "exclude");
        if (body.contains("inputs") && !body["inputs"].is_null()) {
            query.inputs = string_list(body, "inputs");
        } else {
            query.inputs = default_inputs(*kind, snapshot);
        }
        if (auto it = body.find("min_count"); it != body.end() && !it->is_null()) {
            if (!it->is_number_unsigned() || it->get<std::size_t>() < 1) {
                bad_request("min_count must be a positive integer");
            }
            query.min_count = it->get<std::size_t>();
        }

        SuggestionSet set = slot->suggestions->suggest(query, cancel);
        if (set.exhausted) {
            auto e = exhausted_error(set.items.size());
            return {e.http_status, json{{"error", to_json(e)}, {"suggestions", json_io::to_json(set)}}};
        }
        return {200, json_io::to_json(set)};
    }

    Response act(const std::string& id, const json& body) {
        auto kind_name = string_field(body, "kind");
        auto payload = string_field(body, "payload");

        auto slot = find(id);
        std::lock_guard guard(slot->mutex);
        Session next;
        if (kind_name == "replace_word") {
            next = wizard.replace_word(slot->session, string_field(body, "target"), payload);
        } else {
            auto kind = parse_action_kind(kind_name);
            if (!kind) bad_request("unknown action kind \"" + kind_name + "\"");
            Action action{*kind, payload, true, 0, std::nullopt};
            if (*kind == ActionKind::Back || *kind == ActionKind::Restart) action.advance = false;
            if (auto it = body.find("advance"); it != body.end() && !it->is_null()) {
                if (!it->is_boolean()) bad_request("advance must be true or false");
                action.advance = it->get<bool>();
            }
            if (auto it = body.find("typed_chars"); it != body.end() && !it->is_null()) {
                if (!it->is_number_unsigned()) bad_request("typed_chars must be a non-negative integer");
                action.typed_chars = it->get<std::size_t>();
            }
            if (auto step_name = string_field(body, "step"); !step_name.empty()) {
                auto step = parse_step(step_name);
                if (!step) bad_request("unknown step \"" + step_name + "\"");
                action.expected_step = step;
            }
            next = wizard.apply(slot->session, action);
        }
        persist(next);
        slot->session = std::move(next);
        return {200, json_io::to_json(slot->session)};
    }

    Response health() {
        bool reachable = false;
        try {
            reachable = engine.backend && engine.backend->reachable();
        } catch (...) {
            reachable = false;
        }
        return {200, json{{"status", reachable ? "ok" : "degraded"},
                          {"mode", to_string(engine.config.mode)},
                          {"backend_id", engine.backend ? engine.backend->id() : std::string()},
                          {"backend_reachable", reachable}}};
    }

    Response route(std::string_view method, std::string_view path, std::string_view body, std::stop_token cancel) {
        auto parts = split_path(path);
        auto not_found = [] { return error_response(map_error(ErrorCode::NotFound)); };

        if (parts.size() == 1 && parts[0] == "healthz" && method == "GET") return health();
        if (parts.empty() || parts[0] != "sessions") return not_found();

        if (parts.size() == 1) {
            if (method == "POST") return create_session();
            if (method == "GET") return list_sessions();
            return not_found();
        }
        const std::string& id = parts[1];
        if (!is_valid_session_id(id)) return not_found();
        if (parts.size() == 2 && method == "GET") return get_session(id);
        if (parts.size() == 3) {
            if (parts[2] == "prompt" && method == "GET") return get_prompt(id);
            if (parts[2] == "suggest" && method == "POST") return suggest(id, parse_body(body), cancel);
            if (parts[2] == "action" && method == "POST") return act(id, parse_body(body));
        }
        return not_found();
    }

    void install_routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", options.cors_origin},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                                    {"Access-Control-Allow-Headers", "Content-Type"}});
        auto handler = [this](const httplib::Request& req, httplib::Response& res) { serve(req, res); };
        server.Get(".*", handler);
        server.Post(".*", handler);
        server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    }

    void serve(const httplib::Request& req, httplib::Response& res);
};

ApiService::ApiService(Engine engine, std::shared_ptr<SessionStore> store, Wizard wizard, ApiOptions options)
    : impl_(std::make_unique<Impl>(std::move(engine), std::move(store), std::move(wizard), std::move(options))) {
    if (!impl_->engine.client) throw Error(ErrorCode::InvalidConfig, "the API needs an LLM client");
    impl_->install_routes();
}

ApiService::~ApiService() { stop(); }

Response ApiService::handle(std::string_view method, std::string_view path, std::string_view body,
                            std::stop_token cancel) {
    try {
        return impl_->route(method, path, body, cancel);
    } catch (...) {
        return error_response(map_exception(std::current_exception(), impl_->options.production));
    }
}

void ApiService::Impl::serve(const httplib::Request& req, httplib::Response& res) {
    std::stop_source cancel;
    std::jthread watcher;
    if (req.method == "POST" && req.path.size() >= 8 && req.path.ends_with("/suggest")) {
        int fd = find_connection_fd(req.local_port, req.remote_port);
        if (fd >= 0) {
            watcher = std::jthread([fd, &cancel, poll_every = options.disconnect_poll](std::stop_token own) {
                std::mutex m;
                std::condition_variable_any cv;
                std::unique_lock lock(m);
                while (!own.stop_requested()) {
                    if (peer_closed(fd)) {
                        cancel.request_stop();
                        return;
                    }
                    cv.wait_for(lock, own, poll_every, [] { return false; });
                }
            });
        }
    }

    Response out;
    try {
        out = route(req.method, req.path, req.body, cancel.get_token());
    } catch (...) {
        out = error_response(map_exception(std::current_exception(), options.production));
    }
    if (watcher.joinable()) {
        watcher.request_stop();
        watcher.join();
    }
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
}

int ApiService::start(const std::string& host, int port) {
    auto& server = impl_->server;
    int bound = port;
    if (port == 0) {
        bound = server.bind_to_any_port(host);
        if (bound <= 0) throw Error(ErrorCode::IoError, "cannot bind " + host);
    } else if (!server.bind_to_port(host, port)) {
        throw Error(ErrorCode::IoError, "cannot bind " + host + ":" + std::to_string(port));
    }
    impl_->server_thread = std::thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();
    return bound;
}

void ApiService::run(const std::string& host, int port) {
    if (!impl_->server.listen(host, port)) {
        throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
    }
}

void ApiService::stop() {
    impl_->server.stop();
    if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

}  // namespace promptassist::api
