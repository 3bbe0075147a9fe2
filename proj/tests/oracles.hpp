#pragma once

// Independent brute-force oracles used by the test suites. These are
// deliberately written from the defining formulas with long double
// arithmetic and share no code with the library paths they check.

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace oracle {

inline std::vector<double> softmax(const std::vector<double>& z) {
  long double mx = z[0];
  for (double v : z) mx = std::max<long double>(mx, v);
  long double sum = 0.0L;
  std::vector<long double> e(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(z[i]) - mx);
    sum += e[i];
  }
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = static_cast<double>(e[i] / sum);
  return out;
}

inline double kl(const std::vector<double>& t, const std::vector<double>& p) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 0.0) s += static_cast<long double>(t[i]) * std::log(static_cast<long double>(t[i]) / p[i]);
  }
  return static_cast<double>(s);
}

inline double cross_entropy(const std::vector<double>& t, const std::vector<double>& p) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] > 0.0) s -= static_cast<long double>(t[i]) * std::log(static_cast<long double>(p[i]));
  }
  return static_cast<double>(s);
}

inline double entropy(const std::vector<double>& p) {
  long double s = 0.0L;
  for (double v : p) {
    if (v > 0.0) s -= static_cast<long double>(v) * std::log(static_cast<long double>(v));
  }
  return static_cast<double>(s);
}

// Re-normalization target pi'_j = (pi_j^2 / c_j) / sum_k (pi_k^2 / c_k)
inline std::vector<double> renormalize(const std::vector<double>& pi, const std::vector<double>& c) {
  std::vector<long double> w(pi.size());
  long double z = 0.0L;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    w[i] = static_cast<long double>(pi[i]) * pi[i] / c[i];
    z += w[i];
  }
  std::vector<double> out(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) out[i] = static_cast<double>(w[i] / z);
  return out;
}

// SoftCopy weight matrix row j: softmax_i(-|j - i| / tau) over source length.
inline std::vector<std::vector<double>> soft_copy_weights(int src_len, int tgt_len, double tau) {
  std::vector<std::vector<double>> w(static_cast<std::size_t>(tgt_len));
  for (int j = 0; j < tgt_len; ++j) {
    std::vector<double> logits(static_cast<std::size_t>(src_len));
    for (int i = 0; i < src_len; ++i) logits[static_cast<std::size_t>(i)] = -std::abs(j - i) / tau;
    w[static_cast<std::size_t>(j)] = softmax(logits);
  }
  return w;
}

// Corpus BLEU by direct n-gram counting (clipped counts, brevity penalty,
// 0.1 pseudo-count for zero match totals at orders >= 2, zero unigram
// matches give 0).
inline double bleu(const std::vector<std::vector<std::string>>& hyps,
                   const std::vector<std::vector<std::string>>& refs) {
  long double match[4] = {0, 0, 0, 0};
  long double total[4] = {0, 0, 0, 0};
  long double hyp_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < hyps.size(); ++s) {
    const auto& h = hyps[s];
    const auto& r = refs[s];
    hyp_len += static_cast<long double>(h.size());
    ref_len += static_cast<long double>(r.size());
    for (int n = 1; n <= 4; ++n) {
      std::map<std::vector<std::string>, int> hc, rc;
      for (std::size_t i = 0; i + n <= h.size(); ++i) {
        hc[std::vector<std::string>(h.begin() + i, h.begin() + i + n)]++;
      }
      for (std::size_t i = 0; i + n <= r.size(); ++i) {
        rc[std::vector<std::string>(r.begin() + i, r.begin() + i + n)]++;
      }
      for (const auto& [gram, count] : hc) {
        total[n - 1] += count;
        auto it = rc.find(gram);
        if (it != rc.end()) match[n - 1] += std::min(count, it->second);
      }
    }
  }
  if (hyp_len <= 0) return 0.0;
  if (match[0] <= 0) return 0.0;
  long double log_sum = 0.0L;
  int orders = 0;
  for (int n = 0; n < 4; ++n) {
    if (total[n] <= 0) continue;
    const long double m = match[n] > 0 ? match[n] : 0.1L;
    log_sum += std::log(m / total[n]);
    ++orders;
  }
  const long double bp = hyp_len < ref_len ? std::exp(1.0L - ref_len / hyp_len) : 1.0L;
  return static_cast<double>(100.0L * bp * std::exp(log_sum / orders));
}

}  // namespace oracle
