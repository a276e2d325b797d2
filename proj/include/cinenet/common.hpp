#pragma once

#include <charconv>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace cinenet {

using Matrix = std::vector<std::vector<double>>;

/// Raised when an input file cannot be read or a row does not parse.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when parsed data violates a catalog or dataset invariant.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when a numeric procedure fails (non-convergence, degenerate input).
class ComputeError : public std::runtime_error {
 public:
  explicit ComputeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shortest round-trip decimal formatting. Used by every serializer so that
// emitted files are byte-stable and parse back to the exact same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw ComputeError("format_double: value not representable");
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(context + ": not a number: '" + std::string(s) + "'");
  return v;
}

inline long long parse_ll(std::string_view s, const std::string& context) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError(context + ": not an integer: '" + std::string(s) + "'");
  return v;
}

inline std::string_view trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

// Chunked parallel loop. fn(begin, end) is called on contiguous ranges; with
// n_threads <= 1 it degenerates to a single call on the calling thread.
// Work is partitioned by index, so any fn whose chunks are independent gives
// the same result for every thread count.
inline void parallel_chunks(size_t n, int n_threads,
                            const std::function<void(size_t, size_t)>& fn) {
  if (n == 0) return;
  size_t workers = n_threads <= 1 ? 1 : std::min<size_t>(static_cast<size_t>(n_threads), n);
  if (workers == 1) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  size_t chunk = (n + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    size_t b = w * chunk, e = std::min(n, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cinenet
