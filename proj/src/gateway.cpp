#include "mathforge/gateway.hpp"

#include <chrono>
#include <fstream>
#include <random>
#include <thread>

#define CPPHTTPLIB_NO_EXCEPTIONS
#include <httplib.h>

#include "mathforge/sha256.hpp"
#include "mathforge/text.hpp"

namespace mathforge {

namespace fs = std::filesystem;

std::string to_string(Role r) {
    switch (r) {
        case Role::system: return "system";
        case Role::user: return "user";
        case Role::assistant: return "assistant";
    }
    return "user";
}

Role role_from_string(std::string_view s) {
    if (s == "system") return Role::system;
    if (s == "user") return Role::user;
    if (s == "assistant") return Role::assistant;
    throw InvalidRequest("unknown message role: " + std::string(s));
}

std::string to_string(FinishReason f) {
    switch (f) {
        case FinishReason::stop: return "stop";
        case FinishReason::length: return "length";
        case FinishReason::error: return "error";
    }
    return "error";
}

FinishReason finish_reason_from_string(std::string_view s) {
    if (s == "stop") return FinishReason::stop;
    if (s == "length") return FinishReason::length;
    return FinishReason::error;
}

BackendConfig backend_config_from_json(const ojson& j, const fs::path& base_dir) {
    BackendConfig c;
    std::string kind = j.value("kind", "mock");
    if (kind == "http") c.kind = BackendConfig::Kind::http;
    else if (kind == "mock") c.kind = BackendConfig::Kind::mock;
    else throw InvalidRequest("unknown backend kind: " + kind);
    c.endpoint_url = j.value("endpoint_url", "");
    c.api_key_env_var_name = j.value("api_key_env", "");
    c.model = j.value("model", "default");
    c.max_in_flight = j.value("max_in_flight", 4);
    c.max_retries = j.value("max_retries", 3);
    c.retry_base_ms = j.value("retry_base_ms", 1000);
    auto resolve = [&base_dir](const std::string& p) -> fs::path {
        if (p.empty()) return {};
        fs::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    c.script_path = resolve(j.value("script", ""));
    c.cache_dir = resolve(j.value("cache_dir", ""));
    if (c.kind == BackendConfig::Kind::http && c.endpoint_url.empty())
        throw InvalidRequest("http backend requires endpoint_url");
    if (c.max_in_flight < 1) throw InvalidRequest("max_in_flight must be positive");
    return c;
}

namespace {

ojson request_json(const CompletionRequest& r) {
    ojson j;
    j["model"] = r.model;
    j["messages"] = ojson::array();
    for (const auto& m : r.messages) {
        ojson mj;
        mj["role"] = to_string(m.role);
        mj["content"] = m.content;
        j["messages"].push_back(mj);
    }
    j["temperature"] = r.temperature;
    j["max_tokens"] = r.max_tokens;
    if (r.seed) j["seed"] = *r.seed;
    else j["seed"] = nullptr;
    return j;
}

std::string joined_prompt(const CompletionRequest& r) {
    std::string out;
    for (const auto& m : r.messages) {
        if (!out.empty()) out += "\n";
        out += m.content;
    }
    return out;
}

void validate_request(const CompletionRequest& r) {
    bool has_user = false;
    for (const auto& m : r.messages) {
        if (m.content.empty()) throw InvalidRequest("message content must be non-empty");
        if (m.role == Role::user) has_user = true;
    }
    if (!has_user) throw InvalidRequest("request needs at least one user message");
    if (r.temperature < 0) throw InvalidRequest("temperature must be >= 0");
    if (r.max_tokens <= 0) throw InvalidRequest("max_tokens must be positive");
}

bool retryable_status(int status) {
    return status == 0 || status == 429 || (status >= 500 && status < 600);
}

// ------------------------------------------------------------ mock backend

struct ScriptRule {
    enum class Match { exact, contains, contains_all } match = Match::contains;
    std::string pattern;
    std::vector<std::string> patterns;
    std::string response;
    FinishReason finish = FinishReason::stop;
};

class MockScriptBackend final : public Backend {
public:
    MockScriptBackend(std::vector<ScriptRule> rules, std::optional<std::string> fallback)
        : rules_(std::move(rules)), fallback_(std::move(fallback)) {}

    BackendReply complete(const CompletionRequest& request) override {
        std::string prompt = joined_prompt(request);
        for (const auto& rule : rules_) {
            if (matches(rule, prompt)) return make_reply(rule.response, rule.finish);
        }
        if (fallback_) return make_reply(*fallback_, FinishReason::stop);
        throw NoMatchingScriptEntry("no script entry matches prompt: " +
                                    prompt.substr(0, std::min<std::size_t>(prompt.size(), 120)));
    }

    std::string name() const override { return "mock"; }

private:
    static bool matches(const ScriptRule& rule, const std::string& prompt) {
        switch (rule.match) {
            case ScriptRule::Match::exact: return prompt == rule.pattern;
            case ScriptRule::Match::contains: return contains(prompt, rule.pattern);
            case ScriptRule::Match::contains_all:
                for (const auto& p : rule.patterns) {
                    if (!contains(prompt, p)) return false;
                }
                return true;
        }
        return false;
    }

    static BackendReply make_reply(const std::string& content, FinishReason finish) {
        BackendReply reply;
        reply.response.content = content;
        reply.response.finish_reason = content.empty() ? FinishReason::error : finish;
        return reply;
    }

    std::vector<ScriptRule> rules_;
    std::optional<std::string> fallback_;
};

// ------------------------------------------------------------ http backend

// Splits "http://host:port/v1" into client base and path prefix.
std::pair<std::string, std::string> split_endpoint(const std::string& url) {
    std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) return {url, ""};
    std::size_t path = url.find('/', scheme + 3);
    if (path == std::string::npos) return {url, ""};
    std::string prefix = url.substr(path);
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {url.substr(0, path), prefix};
}

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(BackendConfig config) : config_(std::move(config)) {
        std::tie(base_, path_prefix_) = split_endpoint(config_.endpoint_url);
    }

    BackendReply complete(const CompletionRequest& request) override {
        std::string api_key;
        if (!config_.api_key_env_var_name.empty()) {
            const char* v = std::getenv(config_.api_key_env_var_name.c_str());
            if (!v || !*v) throw AuthMissing(config_.api_key_env_var_name);
            api_key = v;
        }
        httplib::Client client(base_);
        client.set_connection_timeout(10, 0);
        client.set_read_timeout(300, 0);
        httplib::Headers headers;
        if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);

        std::string body = request_json(request).dump();
        auto res = client.Post(path_prefix_ + "/chat/completions", headers, body, "application/json");
        BackendReply reply;
        if (!res) {
            reply.status = 0;
            reply.error = "transport error: " + httplib::to_string(res.error());
            return reply;
        }
        reply.status = res->status;
        if (res->status != 200) {
            reply.error = res->body;
            return reply;
        }
        ojson j = ojson::parse(res->body, nullptr, false);
        if (j.is_discarded() || !j.contains("choices") || !j["choices"].is_array() ||
            j["choices"].empty() || !j["choices"][0].contains("message") ||
            !j["choices"][0]["message"].contains("content") ||
            !j["choices"][0]["message"]["content"].is_string()) {
            throw MalformedResponse("completion payload lacks choices[0].message.content");
        }
        const auto& choice = j["choices"][0];
        reply.response.content = choice["message"]["content"].get<std::string>();
        reply.response.finish_reason =
            finish_reason_from_string(choice.value("finish_reason", "stop"));
        if (j.contains("usage") && j["usage"].is_object()) {
            TokenUsage u;
            u.prompt_tokens = j["usage"].value("prompt_tokens", 0LL);
            u.completion_tokens = j["usage"].value("completion_tokens", 0LL);
            u.total_tokens = j["usage"].value("total_tokens", 0LL);
            reply.response.usage = u;
        }
        return reply;
    }

    std::string name() const override { return "http:" + config_.endpoint_url; }

private:
    BackendConfig config_;
    std::string base_;
    std::string path_prefix_;
};

}  // namespace

std::unique_ptr<Backend> mock_from_script(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GatewayError("cannot open mock script: " + path.string());
    std::vector<ScriptRule> rules;
    std::optional<std::string> fallback;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        ojson j = ojson::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw GatewayError("mock script line " + std::to_string(line_no) + " is not a JSON object");
        if (j.contains("default")) {
            fallback = j["default"].get<std::string>();
            continue;
        }
        ScriptRule rule;
        const ojson& m = j.at("match");
        if (m.contains("exact")) {
            rule.match = ScriptRule::Match::exact;
            rule.pattern = m["exact"].get<std::string>();
        } else if (m.contains("contains")) {
            rule.match = ScriptRule::Match::contains;
            rule.pattern = m["contains"].get<std::string>();
        } else if (m.contains("contains_all")) {
            rule.match = ScriptRule::Match::contains_all;
            rule.patterns = m["contains_all"].get<std::vector<std::string>>();
        } else {
            throw GatewayError("mock script line " + std::to_string(line_no) +
                               " needs exact, contains, or contains_all");
        }
        rule.response = j.at("response").get<std::string>();
        rule.finish = finish_reason_from_string(j.value("finish_reason", "stop"));
        rules.push_back(std::move(rule));
    }
    return std::make_unique<MockScriptBackend>(std::move(rules), std::move(fallback));
}

std::unique_ptr<Backend> make_http_backend(const BackendConfig& config) {
    return std::make_unique<HttpBackend>(config);
}

std::string cache_key(const CompletionRequest& request) {
    return sha256_hex(request_json(request).dump());
}

Gateway::Gateway(std::unique_ptr<Backend> backend, BackendConfig config)
    : backend_(std::move(backend)), config_(std::move(config)) {}

Gateway Gateway::from_config(const BackendConfig& config) {
    if (config.kind == BackendConfig::Kind::mock) {
        if (config.script_path.empty()) throw GatewayError("mock backend requires a script path");
        return Gateway(mock_from_script(config.script_path), config);
    }
    return Gateway(make_http_backend(config), config);
}

std::optional<CompletionResponse> Gateway::cache_read(const std::string& key) const {
    if (config_.cache_dir.empty()) return std::nullopt;
    fs::path file = config_.cache_dir / (key + ".json");
    std::ifstream in(file, std::ios::binary);
    if (!in) return std::nullopt;
    ojson j = ojson::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("response")) return std::nullopt;  // damaged entry: refetch
    const ojson& r = j["response"];
    CompletionResponse resp;
    resp.content = r.value("content", "");
    resp.finish_reason = finish_reason_from_string(r.value("finish_reason", "stop"));
    if (r.contains("usage") && r["usage"].is_object()) {
        TokenUsage u;
        u.prompt_tokens = r["usage"].value("prompt_tokens", 0LL);
        u.completion_tokens = r["usage"].value("completion_tokens", 0LL);
        u.total_tokens = r["usage"].value("total_tokens", 0LL);
        resp.usage = u;
    }
    return resp;
}

void Gateway::cache_write(const std::string& key, const CompletionRequest& request,
                          const CompletionResponse& response) const {
    if (config_.cache_dir.empty()) return;
    fs::create_directories(config_.cache_dir);
    ojson j;
    j["key"] = key;
    j["request"] = request_json(request);
    ojson r;
    r["content"] = response.content;
    r["finish_reason"] = to_string(response.finish_reason);
    if (response.usage) {
        ojson u;
        u["prompt_tokens"] = response.usage->prompt_tokens;
        u["completion_tokens"] = response.usage->completion_tokens;
        u["total_tokens"] = response.usage->total_tokens;
        r["usage"] = u;
    }
    j["response"] = r;
    fs::path file = config_.cache_dir / (key + ".json");
    fs::path tmp = config_.cache_dir / (key + ".tmp." + std::to_string(
        std::hash<std::thread::id>{}(std::this_thread::get_id())));
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw GatewayError("cannot write cache entry: " + tmp.string());
        out << j.dump() << "\n";
    }
    fs::rename(tmp, file);
}

CompletionResponse Gateway::complete(CompletionRequest request) {
    if (request.model.empty()) request.model = config_.model;
    validate_request(request);

    std::string key = cache_key(request);
    if (auto cached = cache_read(key)) {
        cache_hits_.fetch_add(1);
        return *cached;
    }

    struct SlotGuard {
        Gateway& g;
        explicit SlotGuard(Gateway& g) : g(g) {
            std::unique_lock lock(g.slots_mutex_);
            g.slots_cv_.wait(lock, [&] { return g.slots_in_use_ < g.config_.max_in_flight; });
            ++g.slots_in_use_;
        }
        ~SlotGuard() {
            {
                std::lock_guard lock(g.slots_mutex_);
                --g.slots_in_use_;
            }
            g.slots_cv_.notify_one();
        }
    } slot(*this);

    static thread_local std::mt19937 jitter_rng{std::random_device{}()};
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        if (attempt > 0) {
            long long delay = static_cast<long long>(config_.retry_base_ms) << (attempt - 1);
            std::uniform_int_distribution<long long> jitter(0, std::max<long long>(1, delay / 10));
            std::this_thread::sleep_for(std::chrono::milliseconds(delay + jitter(jitter_rng)));
            retries_.fetch_add(1);
        }
        backend_calls_.fetch_add(1);
        BackendReply reply = backend_->complete(request);
        if (reply.status == 200) {
            CompletionResponse resp = std::move(reply.response);
            if (resp.finish_reason == FinishReason::stop && resp.content.empty())
                resp.finish_reason = FinishReason::error;
            cache_write(key, request, resp);
            return resp;
        }
        last_error = "status " + std::to_string(reply.status) +
                     (reply.error.empty() ? "" : ": " + reply.error);
        if (!retryable_status(reply.status)) {
            throw BackendUnavailable("backend " + backend_->name() + " failed, " + last_error);
        }
    }
    throw BackendUnavailable("backend " + backend_->name() + " unavailable after " +
                             std::to_string(config_.max_retries) + " retries, last " + last_error);
}

}  // namespace mathforge
