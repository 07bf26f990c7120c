#include "spinelaw/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string_view>
#include <thread>
#include <vector>

#include "spinelaw/error.hpp"

namespace spinelaw {

auto resolve_thread_count(std::optional<unsigned> requested) -> unsigned {
  if (requested) {
    if (*requested == 0) throw Error{Error_kind::config, "--threads: must be >= 1"};
    return *requested;
  }
  if (const char* env = std::getenv("SPINELAW_THREADS"); env != nullptr && *env != '\0') {
    const auto text = std::string_view{env};
    auto value = 0u;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || value == 0) {
      throw Error{Error_kind::config, "SPINELAW_THREADS: must be a positive integer"};
    }
    return value;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(unsigned, std::size_t)>& body) {
  const auto workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(n, 1)));
  if (workers <= 1) {
    for (auto i = std::size_t{0}; i < n; ++i) body(0, i);
    return;
  }
  auto next = std::atomic<std::size_t>{0};
  auto failed = std::atomic<bool>{false};
  auto first_error = std::exception_ptr{};
  auto error_mutex = std::mutex{};
  auto run = [&](unsigned worker) {
    while (!failed.load(std::memory_order_relaxed)) {
      const auto i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        body(worker, i);
      } catch (...) {
        const auto lock = std::lock_guard{error_mutex};
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };
  auto pool = std::vector<std::thread>{};
  pool.reserve(workers);
  for (auto w = 0u; w < workers; ++w) pool.emplace_back(run, w);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace spinelaw
