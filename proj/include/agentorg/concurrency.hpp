#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace agentorg {

// Counting gate bounding the number of in-flight backend calls across runs.
class CallGate {
public:
    explicit CallGate(std::size_t limit) : available_(limit == 0 ? 1 : limit) {}

    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return available_ > 0; });
        --available_;
    }
    void release() {
        {
            std::lock_guard lock(mutex_);
            ++available_;
        }
        cv_.notify_one();
    }

    class Permit {
    public:
        explicit Permit(CallGate* gate) : gate_(gate) {
            if (gate_) gate_->acquire();
        }
        ~Permit() {
            if (gate_) gate_->release();
        }
        Permit(const Permit&) = delete;
        Permit& operator=(const Permit&) = delete;

    private:
        CallGate* gate_;
    };

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::size_t available_;
};

// Token bucket: `rate_per_second` refill, `burst` capacity. rate <= 0 disables limiting.
class TokenBucket {
public:
    using clock = std::chrono::steady_clock;

    TokenBucket(double rate_per_second, double burst)
        : rate_(rate_per_second), capacity_(burst < 1.0 ? 1.0 : burst), tokens_(capacity_), last_(clock::now()) {}

    // Blocks until one token is available.
    void take() {
        if (rate_ <= 0.0) return;
        std::unique_lock lock(mutex_);
        for (;;) {
            refill();
            if (tokens_ >= 1.0) {
                tokens_ -= 1.0;
                return;
            }
            const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
            lock.unlock();
            std::this_thread::sleep_for(wait);
            lock.lock();
        }
    }

private:
    void refill() {
        const auto now = clock::now();
        const double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
    }

    std::mutex mutex_;
    double rate_;
    double capacity_;
    double tokens_;
    clock::time_point last_;
};

// Runs fn(i) for i in [0, count) on at most `max_parallel` threads. Rethrows the
// first exception after all workers finish.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t max_parallel, Fn&& fn) {
    if (count == 0) return;
    const std::size_t workers = std::max<std::size_t>(1, std::min(count, max_parallel));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    try {
                        fn(i);
                    } catch (...) {
                        std::lock_guard lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        }
    }
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace agentorg
