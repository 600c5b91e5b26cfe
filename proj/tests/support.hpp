#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "mathforge/gateway.hpp"

namespace mftest {

namespace fs = std::filesystem;

inline fs::path fixtures_dir() { return fs::path(MF_FIXTURES); }

// Fresh per-test scratch directory under the build tree.
inline fs::path temp_dir(const std::string& name) {
    static std::atomic<int> counter{0};
    fs::path dir = fs::path("mf_test_tmp") / (name + "_" + std::to_string(counter.fetch_add(1)));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

inline mathforge::BackendReply ok_reply(std::string content,
                                        mathforge::FinishReason finish = mathforge::FinishReason::stop) {
    mathforge::BackendReply r;
    r.response.content = std::move(content);
    r.response.finish_reason = finish;
    return r;
}

inline mathforge::BackendReply status_reply(int status, std::string error = "") {
    mathforge::BackendReply r;
    r.status = status;
    r.error = std::move(error);
    return r;
}

// Replays a fixed list of replies in call order; repeats the last one when
// exhausted. Counts calls and the peak number of concurrent entries.
class SequenceBackend final : public mathforge::Backend {
public:
    explicit SequenceBackend(std::vector<mathforge::BackendReply> replies)
        : replies_(std::move(replies)) {}

    mathforge::BackendReply complete(const mathforge::CompletionRequest&) override {
        int now = concurrent_.fetch_add(1) + 1;
        int peak = peak_concurrent_.load();
        while (now > peak && !peak_concurrent_.compare_exchange_weak(peak, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        std::size_t index;
        {
            std::lock_guard lock(mutex_);
            index = std::min(next_++, replies_.size() - 1);
        }
        concurrent_.fetch_sub(1);
        return replies_[index];
    }

    std::string name() const override { return "sequence"; }

    std::size_t calls() const {
        std::lock_guard lock(mutex_);
        return next_;
    }
    int peak_concurrent() const { return peak_concurrent_.load(); }

private:
    std::vector<mathforge::BackendReply> replies_;
    mutable std::mutex mutex_;
    std::size_t next_ = 0;
    std::atomic<int> concurrent_{0};
    std::atomic<int> peak_concurrent_{0};
};

// Same scripted reply for every request.
class ConstantBackend final : public mathforge::Backend {
public:
    explicit ConstantBackend(std::string content) : content_(std::move(content)) {}

    mathforge::BackendReply complete(const mathforge::CompletionRequest&) override {
        ++calls_;
        return ok_reply(content_);
    }

    std::string name() const override { return "constant"; }
    long long calls() const { return calls_.load(); }

private:
    std::string content_;
    std::atomic<long long> calls_{0};
};

inline mathforge::BackendConfig plain_config(int max_retries = 1, int retry_base_ms = 1,
                                             fs::path cache_dir = {}) {
    mathforge::BackendConfig c;
    c.kind = mathforge::BackendConfig::Kind::mock;
    c.model = "test-model";
    c.max_retries = max_retries;
    c.retry_base_ms = retry_base_ms;
    c.cache_dir = std::move(cache_dir);
    return c;
}

inline mathforge::CompletionRequest user_request(std::string prompt, long long seed = 0) {
    mathforge::CompletionRequest r;
    r.messages.push_back({mathforge::Role::user, std::move(prompt)});
    r.seed = seed;
    return r;
}

}  // namespace mftest
