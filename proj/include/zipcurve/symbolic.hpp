#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "zipcurve/core.hpp"

namespace zipcurve {

// Finite word over {0..N-1}; the address of a cylinder.
struct Word {
  std::vector<int> symbols;

  std::size_t size() const { return symbols.size(); }

  // Digit string for small alphabets, comma-separated otherwise.
  std::string str(int n_symbols = 2) const {
    std::string out;
    if (n_symbols <= 10) {
      for (int s : symbols) out += static_cast<char>('0' + s);
    } else {
      for (std::size_t i = 0; i < symbols.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(symbols[i]);
      }
    }
    return out;
  }
};

inline bool operator==(const Word& a, const Word& b) { return a.symbols == b.symbols; }

// One-sided infinite word, stored exactly as a finite prefix plus an
// eventually-periodic tail. Indexing is 0-based internally.
class SymbolStream {
 public:
  SymbolStream(std::vector<int> prefix, std::vector<int> period)
      : prefix_(std::move(prefix)), period_(std::move(period)) {
    if (period_.empty()) throw std::invalid_argument("stream: tail period must be nonempty");
  }

  static SymbolStream constant(int symbol) { return SymbolStream({}, {symbol}); }

  int at(std::size_t k) const {
    if (k < prefix_.size()) return prefix_[k];
    return period_[(k - prefix_.size()) % period_.size()];
  }

  SymbolStream shifted(std::size_t k) const {
    if (k <= prefix_.size())
      return SymbolStream(std::vector<int>(prefix_.begin() + k, prefix_.end()), period_);
    const std::size_t r = (k - prefix_.size()) % period_.size();
    std::vector<int> rolled(period_.begin() + r, period_.end());
    rolled.insert(rolled.end(), period_.begin(), period_.begin() + r);
    return SymbolStream({}, std::move(rolled));
  }

  const std::vector<int>& prefix() const { return prefix_; }
  const std::vector<int>& period() const { return period_; }

  // Serialized as "prefix(period)", digits for N <= 10.
  std::string str() const {
    std::string out;
    for (int s : prefix_) out += static_cast<char>('0' + s);
    out += '(';
    for (int s : period_) out += static_cast<char>('0' + s);
    out += ')';
    return out;
  }

  static SymbolStream parse(const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.find(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
      throw std::invalid_argument("stream: expected \"prefix(period)\"");
    std::vector<int> pre, per;
    for (std::size_t i = 0; i < open; ++i) pre.push_back(text[i] - '0');
    for (std::size_t i = open + 1; i < close; ++i) per.push_back(text[i] - '0');
    return SymbolStream(std::move(pre), std::move(per));
  }

 private:
  std::vector<int> prefix_;
  std::vector<int> period_;
};

inline constexpr std::size_t kUnboundedRun = std::numeric_limits<std::size_t>::max();

// Two eventually periodic streams that agree through offset+lcm(periods)
// symbols are identical.
inline std::size_t stream_equality_horizon(const SymbolStream& a, const SymbolStream& b) {
  const std::size_t off = std::max(a.prefix().size(), b.prefix().size());
  const std::uint64_t l =
      std::lcm<std::uint64_t>(a.period().size(), b.period().size());
  const std::uint64_t horizon = off + std::min<std::uint64_t>(l, std::uint64_t{1} << 20);
  return static_cast<std::size_t>(horizon);
}

// Length of the longest common prefix (the count of agreeing leading
// symbols). Throws if the streams are identical.
inline std::size_t wedge(const SymbolStream& a, const SymbolStream& b) {
  const std::size_t horizon = stream_equality_horizon(a, b);
  for (std::size_t k = 0; k <= horizon; ++k)
    if (a.at(k) != b.at(k)) return k;
  throw std::invalid_argument("wedge: undefined for identical streams");
}

// Number of leading symbols of `a` equal to `symbol`; kUnboundedRun for a
// constant-`symbol` stream.
inline std::size_t leading_run(const SymbolStream& a, int symbol) {
  const std::size_t horizon = a.prefix().size() + a.period().size();
  for (std::size_t k = 0; k < horizon; ++k)
    if (a.at(k) != symbol) return k;
  return kUnboundedRun;
}

struct VeeResult {
  std::size_t value = 0;
  bool capped = false;  // both runs unbounded (double coding); value is the cap
};

// The alignment depth beyond the common prefix at which two addresses
// stop hugging the shared cell boundary. Case table over the
// discriminating symbols and their signature bits; 0 unless those symbols
// are adjacent.
inline VeeResult vee(const SymbolStream& i, const SymbolStream& j, const std::vector<int>& signature,
                     std::size_t cap = 4096) {
  const int n = static_cast<int>(signature.size());
  const std::size_t w = wedge(i, j);
  const int a = i.at(w);
  const int b = j.at(w);
  VeeResult out;
  if (a + 1 != b && b + 1 != a) return out;

  const SymbolStream si = i.shifted(w + 1);
  const SymbolStream sj = j.shifted(w + 1);
  const int top = n - 1;
  std::size_t run_i, run_j;
  if (a + 1 == b) {
    const bool ea = signature[a] != 0, eb = signature[b] != 0;
    run_i = leading_run(si, ea ? 0 : top);
    run_j = leading_run(sj, eb ? top : 0);
  } else {  // b + 1 == a
    const bool ea = signature[a] != 0, eb = signature[b] != 0;
    run_j = leading_run(sj, eb ? 0 : top);
    run_i = leading_run(si, ea ? top : 0);
  }
  std::size_t v = std::min(run_i, run_j);
  if (v == kUnboundedRun) {
    out.value = cap;
    out.capped = true;
  } else {
    out.value = std::min(v, cap);
    out.capped = v > cap;
  }
  return out;
}

// pi(i): the parameter addressed by the stream, summed exactly through
// the geometric series of the periodic tail. Signed scales carry the
// orientation reversals of the signature.
inline double pi_project(const Zipper& z, const SymbolStream& s) {
  const std::vector<double> cum = z.cumulative_weights();
  auto gamma = [&](int k) { return cum[k] + z.signature[k] * z.weights[k]; };
  auto scale = [&](int k) { return z.signature[k] ? -z.weights[k] : z.weights[k]; };

  double acc = 0.0, a = 1.0;
  for (int k : s.prefix()) {
    acc += a * gamma(k);
    a *= scale(k);
  }
  double per_sum = 0.0, b = 1.0;
  for (int k : s.period()) {
    per_sum += b * gamma(k);
    b *= scale(k);
  }
  return acc + a * per_sum / (1.0 - b);
}

// Pi(i): the curve point addressed by the stream, truncated once
// ||A_{i|n}|| R <= tol.
inline Vec Pi_project(const Zipper& z, const SymbolStream& s, double tol,
                      const AttractorBound& bound) {
  if (!(tol > 0.0)) throw std::invalid_argument("Pi_project: tol must be positive");
  if (!std::isfinite(bound.radius))
    throw std::domain_error("Pi_project: zipper is not jointly contracting");
  const int d = z.dim;
  Mat comp = Mat::identity(d);
  Vec off(d, 0.0);
  constexpr std::size_t kMaxDepth = 1 << 16;
  for (std::size_t k = 0; spectral_norm(comp) * bound.radius > tol; ++k) {
    if (k >= kMaxDepth) throw std::domain_error("Pi_project: tolerance unreachable");
    const AffineMap& f = z.maps[s.at(k)];
    off = comp * f.offset + off;
    comp = comp * f.linear;
  }
  return comp * bound.center + off;
}

inline Vec Pi_project(const Zipper& z, const SymbolStream& s, double tol) {
  return Pi_project(z, s, tol, attractor_bound(z));
}

struct CylinderPartition {
  double r = 0.0;
  std::vector<Word> words;
  std::vector<double> word_weights;  // lambda-products, parallel to words
};

// The stopping-time partition of Eq-type lambda_{i|n} <= r < lambda_{i|n-1}.
inline CylinderPartition xi_partition(const std::vector<double>& weights, double r,
                                      std::uint64_t budget = std::uint64_t{1} << 24) {
  if (!(r > 0.0 && r < 1.0)) throw std::invalid_argument("xi_partition: r must lie in (0,1)");
  double wmin = 1.0;
  for (double w : weights) wmin = std::min(wmin, w);
  if (1.0 / (r * wmin) > static_cast<double>(budget))
    throw std::invalid_argument("xi_partition: cardinality bound exceeds budget");

  CylinderPartition part;
  part.r = r;
  std::vector<int> word;
  std::vector<double> prod{1.0};
  const int n = static_cast<int>(weights.size());
  // DFS with explicit emit rule: child weight <= r stops.
  std::vector<int> branch;
  branch.push_back(0);
  while (!branch.empty()) {
    if (branch.back() == n) {
      branch.pop_back();
      if (!word.empty()) {
        word.pop_back();
        prod.pop_back();
      }
      if (!branch.empty()) ++branch.back();
      continue;
    }
    const int sym = branch.back();
    const double w = prod.back() * weights[sym];
    if (w <= r) {
      word.push_back(sym);
      part.words.push_back({word});
      part.word_weights.push_back(w);
      word.pop_back();
      ++branch.back();
    } else {
      word.push_back(sym);
      prod.push_back(w);
      branch.push_back(0);
    }
  }
  return part;
}

struct DistanceBracket {
  double s = 0.0;           // lambda_{i|w+v} + lambda_{j|w+v}
  std::size_t wedge = 0;
  std::size_t vee = 0;
  bool vee_capped = false;
};

// The two-sided comparison quantity for |pi(i) - pi(j)|: there is a
// constant K with K^-1 s <= |pi(i)-pi(j)| <= K s away from double
// codings. Requires signature zero.
inline DistanceBracket distance_bracket(const Zipper& z, const SymbolStream& i,
                                        const SymbolStream& j, std::size_t cap = 256) {
  for (int e : z.signature)
    if (e != 0) throw std::invalid_argument("distance_bracket: requires signature zero");
  DistanceBracket out;
  out.wedge = wedge(i, j);
  const VeeResult v = vee(i, j, z.signature, cap);
  out.vee = v.value;
  out.vee_capped = v.capped;
  const std::size_t m = out.wedge + out.vee;
  double li = 1.0, lj = 1.0;
  for (std::size_t k = 0; k < m; ++k) {
    li *= z.weights[i.at(k)];
    lj *= z.weights[j.at(k)];
  }
  out.s = li + lj;
  return out;
}

}  // namespace zipcurve
