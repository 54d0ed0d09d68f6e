#ifndef HSPMV_THREAD_TEAM_HPP
#define HSPMV_THREAD_TEAM_HPP

#include <atomic>
#include <barrier>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace hspmv {

/// Fixed group of long-lived threads that run one job at a time. Every thread
/// executes job(tid); barrier() synchronizes the team from inside a job.
/// A job that calls barrier() must not throw between barriers.
class ThreadTeam {
  public:
    explicit ThreadTeam(int nthreads);
    ~ThreadTeam();
    ThreadTeam(const ThreadTeam&) = delete;
    ThreadTeam& operator=(const ThreadTeam&) = delete;

    int size() const { return static_cast<int>(threads_.size()); }

    /// Hands the job to all threads and returns immediately.
    void start(std::function<void(int)> job);
    /// Blocks until every thread has finished the current job; rethrows the
    /// first exception raised by any of them.
    void wait();
    void run(std::function<void(int)> job) {
        start(std::move(job));
        wait();
    }

    void barrier() { barrier_.arrive_and_wait(); }

  private:
    void loop(int tid);

    std::atomic<std::uint64_t> generation_{0};
    std::atomic<int> remaining_{0};
    std::atomic<bool> stop_{false};
    std::function<void(int)> job_;
    std::mutex error_mutex_;
    std::exception_ptr error_;
    std::barrier<> barrier_;
    std::vector<std::jthread> threads_;
};

}  // namespace hspmv

#endif  // HSPMV_THREAD_TEAM_HPP
