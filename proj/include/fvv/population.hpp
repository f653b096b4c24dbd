#pragma once

#include <map>
#include <vector>

#include "fvv/errors.hpp"

namespace fvv {

// Peer counts per occupied grid point. Counts are integers so that churn
// events stay exact; view fractions q are derived on demand.
class PeerPopulation {
 public:
  PeerPopulation() = default;

  void add(int k, long long n = 1) {
    if (n < 0) throw InvalidArgument("PeerPopulation::add: negative count");
    if (n == 0) return;
    counts_[k] += n;
    total_ += n;
  }

  void remove(int k, long long n = 1) {
    auto it = counts_.find(k);
    if (it == counts_.end() || it->second < n)
      throw InvalidArgument("PeerPopulation::remove: count underflow");
    it->second -= n;
    total_ -= n;
    if (it->second == 0) counts_.erase(it);
  }

  long long count(int k) const {
    auto it = counts_.find(k);
    return it == counts_.end() ? 0 : it->second;
  }

  long long total() const { return total_; }
  bool empty() const { return total_ == 0; }

  // Fraction of peers at grid point k.
  double fraction(int k) const {
    if (total_ == 0) throw InvalidArgument("PeerPopulation::fraction: empty population");
    return static_cast<double>(count(k)) / static_cast<double>(total_);
  }

  const std::map<int, long long>& counts() const { return counts_; }

  std::vector<int> occupied() const {
    std::vector<int> out;
    out.reserve(counts_.size());
    for (const auto& [k, n] : counts_) out.push_back(k);
    return out;
  }

  bool operator==(const PeerPopulation& other) const {
    return counts_ == other.counts_;
  }

 private:
  std::map<int, long long> counts_;
  long long total_ = 0;
};

}  // namespace fvv
