#include "hspmv/thread_team.hpp"

#include <stdexcept>
#include <utility>

#include "hspmv/fabric.hpp"

namespace hspmv {

ThreadTeam::ThreadTeam(int nthreads) : barrier_(nthreads) {
    if (nthreads < 1) {
        throw std::invalid_argument("thread team needs at least one thread");
    }
    threads_.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        threads_.emplace_back([this, t] { loop(t); });
    }
}

ThreadTeam::~ThreadTeam() {
    stop_.store(true);
    generation_.fetch_add(1, std::memory_order_release);
    generation_.notify_all();
    // jthread joins on destruction
}

void ThreadTeam::start(std::function<void(int)> job) {
    if (remaining_.load(std::memory_order_acquire) != 0) {
        throw std::logic_error("thread team already running a job");
    }
    job_ = std::move(job);
    error_ = nullptr;
    remaining_.store(size(), std::memory_order_relaxed);
    generation_.fetch_add(1, std::memory_order_release);
    generation_.notify_all();
}

void ThreadTeam::wait() {
    for (int left = remaining_.load(std::memory_order_acquire); left != 0;
         left = remaining_.load(std::memory_order_acquire)) {
        remaining_.wait(left, std::memory_order_acquire);
    }
    job_ = nullptr;
    if (error_) {
        std::rethrow_exception(std::exchange(error_, nullptr));
    }
}

void ThreadTeam::loop(int tid) {
    tighten_timer_slack();
    std::uint64_t seen = 0;
    for (;;) {
        generation_.wait(seen, std::memory_order_acquire);
        seen = generation_.load(std::memory_order_acquire);
        if (stop_.load()) {
            return;
        }
        try {
            job_(tid);
        } catch (...) {
            std::lock_guard lock(error_mutex_);
            if (!error_) {
                error_ = std::current_exception();
            }
        }
        if (remaining_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
            remaining_.notify_all();
        }
    }
}

}  // namespace hspmv
