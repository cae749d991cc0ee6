#include "ecrt/common.hpp"

#include <iostream>
#include <map>
#include <mutex>

namespace ecrt::diag {

namespace {
std::mutex g_mu;
std::map<std::string, long> g_counts;
constexpr long kMaxPrinted = 5;
}  // namespace

void warn(const std::string& tag, const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_mu);
  long n = ++g_counts[tag];
  if (n <= kMaxPrinted) {
    std::cerr << "[diag:" << tag << "] " << msg;
    if (n == kMaxPrinted) std::cerr << " (further occurrences suppressed)";
    std::cerr << "\n";
  }
}

long count(const std::string& tag) {
  std::lock_guard<std::mutex> lock(g_mu);
  auto it = g_counts.find(tag);
  return it == g_counts.end() ? 0 : it->second;
}

void reset() {
  std::lock_guard<std::mutex> lock(g_mu);
  g_counts.clear();
}

}  // namespace ecrt::diag
