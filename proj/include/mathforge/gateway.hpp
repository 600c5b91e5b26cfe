#pragma once

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace mathforge {

using ojson = nlohmann::ordered_json;

enum class Role { system, user, assistant };

std::string to_string(Role r);
Role role_from_string(std::string_view s);

struct Message {
    Role role = Role::user;
    std::string content;
};

struct CompletionRequest {
    std::string model;
    std::vector<Message> messages;
    double temperature = 0.0;
    int max_tokens = 1024;
    std::optional<long long> seed;
};

enum class FinishReason { stop, length, error };

std::string to_string(FinishReason f);
FinishReason finish_reason_from_string(std::string_view s);

struct TokenUsage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
    long long total_tokens = 0;
};

struct CompletionResponse {
    std::string content;
    FinishReason finish_reason = FinishReason::stop;
    std::optional<TokenUsage> usage;
};

// What a backend produced for one attempt. status uses HTTP semantics:
// 200 success, 429/5xx retryable, 0 transport failure (retryable),
// anything else fatal.
struct BackendReply {
    int status = 200;
    CompletionResponse response;
    std::string error;
};

class Backend {
public:
    virtual ~Backend() = default;
    virtual BackendReply complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
};

struct BackendConfig {
    enum class Kind { http, mock };
    Kind kind = Kind::mock;
    std::string endpoint_url;
    std::string api_key_env_var_name;  // secrets come from the environment, never from files
    std::string model = "default";
    std::filesystem::path script_path;  // mock backend script
    int max_in_flight = 4;
    int max_retries = 3;
    std::filesystem::path cache_dir;  // empty disables caching
    int retry_base_ms = 1000;         // backoff base; factor 2, plus jitter
};

BackendConfig backend_config_from_json(const ojson& j, const std::filesystem::path& base_dir);

class GatewayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidRequest : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class AuthMissing : public GatewayError {
public:
    explicit AuthMissing(const std::string& var)
        : GatewayError("API key environment variable is not set: " + var) {}
};

class BackendUnavailable : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class MalformedResponse : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class NoMatchingScriptEntry : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// Stable content-addressed digest over (model, messages, temperature, seed,
// max_tokens).
std::string cache_key(const CompletionRequest& request);

// Script file: JSONL of {"match": {"exact"|"contains": str | "contains_all":
// [str...]}, "response": str, "finish_reason"?: str}; an optional
// {"default": str} line answers anything unmatched. First match wins.
std::unique_ptr<Backend> mock_from_script(const std::filesystem::path& path);

std::unique_ptr<Backend> make_http_backend(const BackendConfig& config);

// Completion front door shared by the pipeline stages: response cache,
// bounded in-flight requests, retry with exponential backoff on 429/5xx.
class Gateway {
public:
    Gateway(std::unique_ptr<Backend> backend, BackendConfig config);

    static Gateway from_config(const BackendConfig& config);

    CompletionResponse complete(CompletionRequest request);

    const std::string& model() const { return config_.model; }
    std::string backend_name() const { return backend_->name(); }

    long long backend_calls() const { return backend_calls_.load(); }
    long long cache_hits() const { return cache_hits_.load(); }
    long long retries() const { return retries_.load(); }

private:
    std::optional<CompletionResponse> cache_read(const std::string& key) const;
    void cache_write(const std::string& key, const CompletionRequest& request,
                     const CompletionResponse& response) const;

    std::unique_ptr<Backend> backend_;
    BackendConfig config_;
    std::mutex slots_mutex_;
    std::condition_variable slots_cv_;
    int slots_in_use_ = 0;
    std::atomic<long long> backend_calls_{0};
    std::atomic<long long> cache_hits_{0};
    std::atomic<long long> retries_{0};
};

}  // namespace mathforge
