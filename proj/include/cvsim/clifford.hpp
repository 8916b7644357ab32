#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "cvsim/rng.hpp"

// Stabilizer simulation of the clustered-qubit chain: L sites of N qubits,
// random intra-cluster pairings plus one inter-cluster gate per bond per
// step, whole-cluster Z measurements at rate p, and mutual information
// between antipodal regions.
//
// Pauli encoding: a string is i^r * tensor_q X^{x_q} Z^{z_q} with r mod 4
// tracked per generator. Multiplication appends 2 * popcount(z1 & x2) to r;
// Hermitian strings have r congruent to the Y-count mod 2.

namespace cvsim {

// One Hermitian 2-qubit Pauli: bit 0 of x/z is the first qubit.
struct Pauli2 {
  std::uint8_t x = 0;  // 2 bits
  std::uint8_t z = 0;  // 2 bits
  std::uint8_t r = 0;  // phase exponent mod 4
};

inline Pauli2 pauli2_multiply(const Pauli2& a, const Pauli2& b) {
  Pauli2 out;
  out.r = static_cast<std::uint8_t>(
      (a.r + b.r + 2 * std::popcount(static_cast<unsigned>(a.z & b.x))) & 3);
  out.x = a.x ^ b.x;
  out.z = a.z ^ b.z;
  return out;
}

inline bool pauli2_anticommute(const Pauli2& a, const Pauli2& b) {
  return (std::popcount(static_cast<unsigned>(a.x & b.z)) +
          std::popcount(static_cast<unsigned>(a.z & b.x))) %
             2 ==
         1;
}

// A 2-qubit Clifford element as the images of X_1, Z_1, X_2, Z_2 under
// conjugation.
struct TwoQubitClifford {
  Pauli2 img[4];
};

namespace detail {

inline Pauli2 pauli2_from_code(int code) {
  // code in [1, 15]: low 2 bits x, high 2 bits z; canonical + sign.
  Pauli2 p;
  p.x = static_cast<std::uint8_t>(code & 3);
  p.z = static_cast<std::uint8_t>((code >> 2) & 3);
  p.r = static_cast<std::uint8_t>(std::popcount(static_cast<unsigned>(p.x & p.z)) & 3);
  return p;
}

}  // namespace detail

// Uniform over the 2-qubit Clifford group modulo global phase (11520
// elements: |Sp(4,2)| = 720 tableau shapes times 2^4 sign choices). Sampled
// by drawing the image of X_1 from the 15 non-identity Paulis, Z_1 from the 8
// that anticommute with it, then the second pair from the centralizer of the
// first (3 and 2 choices), plus independent sign bits.
inline TwoQubitClifford random_two_qubit_clifford(Rng& rng) {
  auto pick = [&rng](const std::vector<int>& candidates) {
    return candidates[static_cast<std::size_t>(rng.below(candidates.size()))];
  };
  std::vector<int> pool;
  pool.reserve(15);

  const int cx1 = static_cast<int>(rng.below(15)) + 1;
  const Pauli2 x1 = detail::pauli2_from_code(cx1);

  pool.clear();
  for (int c = 1; c <= 15; ++c) {
    if (pauli2_anticommute(x1, detail::pauli2_from_code(c))) pool.push_back(c);
  }
  const Pauli2 z1 = detail::pauli2_from_code(pick(pool));

  pool.clear();
  for (int c = 1; c <= 15; ++c) {
    const Pauli2 p = detail::pauli2_from_code(c);
    if (!pauli2_anticommute(x1, p) && !pauli2_anticommute(z1, p)) pool.push_back(c);
  }
  const Pauli2 x2 = detail::pauli2_from_code(pick(pool));

  pool.clear();
  for (int c = 1; c <= 15; ++c) {
    const Pauli2 p = detail::pauli2_from_code(c);
    if (!pauli2_anticommute(x1, p) && !pauli2_anticommute(z1, p) &&
        pauli2_anticommute(x2, p)) {
      pool.push_back(c);
    }
  }
  const Pauli2 z2 = detail::pauli2_from_code(pick(pool));

  TwoQubitClifford cl;
  cl.img[0] = x1;
  cl.img[1] = z1;
  cl.img[2] = x2;
  cl.img[3] = z2;
  for (auto& p : cl.img) {
    if (rng.bernoulli(0.5)) p.r = static_cast<std::uint8_t>((p.r + 2) & 3);
  }
  return cl;
}

struct MeasurementOutcome {
  bool random = false;  // true when some generator anticommuted with Z_q
  int value = 0;        // measured bit when random (0 -> +Z stabilized)
};

// n-qubit stabilizer tableau: n generator rows with bit-packed X/Z blocks and
// a phase exponent per row.
class StabilizerTableau {
 public:
  explicit StabilizerTableau(int n_qubits)
      : n_(n_qubits), words_((n_qubits + 63) / 64) {
    if (n_qubits < 1) throw std::invalid_argument("StabilizerTableau: need >= 1 qubit");
    xs_.assign(static_cast<std::size_t>(n_) * words_, 0);
    zs_.assign(static_cast<std::size_t>(n_) * words_, 0);
    phase_.assign(n_, 0);
    // |0...0>: generators Z_i.
    for (int i = 0; i < n_; ++i) set_z_bit(i, i);
  }

  int n_qubits() const { return n_; }

  bool x_bit(int row, int q) const {
    return (xs_[idx(row, q >> 6)] >> (q & 63)) & 1u;
  }
  bool z_bit(int row, int q) const {
    return (zs_[idx(row, q >> 6)] >> (q & 63)) & 1u;
  }
  int phase(int row) const { return phase_[row]; }

  // row_t <- row_t * row_s.
  void multiply_into(int t, int s) {
    int cross = 0;
    const std::size_t bt = static_cast<std::size_t>(t) * words_;
    const std::size_t bs = static_cast<std::size_t>(s) * words_;
    for (int w = 0; w < words_; ++w) {
      cross += std::popcount(zs_[bt + w] & xs_[bs + w]);
      xs_[bt + w] ^= xs_[bs + w];
      zs_[bt + w] ^= zs_[bs + w];
    }
    phase_[t] = static_cast<std::uint8_t>((phase_[t] + phase_[s] + 2 * cross) & 3);
  }

  void apply_two_qubit(const TwoQubitClifford& cl, int qa, int qb) {
    if (qa == qb || qa < 0 || qb < 0 || qa >= n_ || qb >= n_) {
      throw std::invalid_argument("apply_two_qubit: bad qubit pair");
    }
    for (int row = 0; row < n_; ++row) {
      const bool xa = x_bit(row, qa), za = z_bit(row, qa);
      const bool xb = x_bit(row, qb), zb = z_bit(row, qb);
      if (!(xa || za || xb || zb)) continue;
      Pauli2 acc{0, 0, 0};
      if (xa) acc = pauli2_multiply(acc, cl.img[0]);
      if (za) acc = pauli2_multiply(acc, cl.img[1]);
      if (xb) acc = pauli2_multiply(acc, cl.img[2]);
      if (zb) acc = pauli2_multiply(acc, cl.img[3]);
      assign_bit(xs_, row, qa, acc.x & 1);
      assign_bit(zs_, row, qa, acc.z & 1);
      assign_bit(xs_, row, qb, (acc.x >> 1) & 1);
      assign_bit(zs_, row, qb, (acc.z >> 1) & 1);
      phase_[row] = static_cast<std::uint8_t>((phase_[row] + acc.r) & 3);
    }
  }

  // Z-basis measurement of qubit q. When some generator anticommutes with
  // Z_q the outcome is the given bit (or a fresh coin when forced < 0);
  // otherwise the outcome is determined and the tableau is unchanged.
  MeasurementOutcome measure_z(int q, Rng& rng, int forced = -1) {
    int pivot = -1;
    for (int row = 0; row < n_; ++row) {
      if (x_bit(row, q)) {
        pivot = row;
        break;
      }
    }
    if (pivot < 0) return MeasurementOutcome{false, 0};
    for (int row = pivot + 1; row < n_; ++row) {
      if (x_bit(row, q)) multiply_into(row, pivot);
    }
    const int outcome = forced >= 0 ? forced : static_cast<int>(rng.next_u64() & 1u);
    clear_row(pivot);
    set_z_bit(pivot, q);
    phase_[pivot] = static_cast<std::uint8_t>(outcome ? 2 : 0);
    return MeasurementOutcome{true, outcome};
  }

  // Generators restricted to `region` packed as [x bits | z bits] rows.
  std::vector<std::vector<std::uint64_t>> restricted_rows(std::span<const int> region) const {
    const int k = static_cast<int>(region.size());
    const int row_words = (2 * k + 63) / 64;
    std::vector<std::vector<std::uint64_t>> rows(
        n_, std::vector<std::uint64_t>(row_words, 0));
    for (int row = 0; row < n_; ++row) {
      for (int j = 0; j < k; ++j) {
        if (x_bit(row, region[j])) rows[row][j >> 6] |= 1ull << (j & 63);
        const int zj = k + j;
        if (z_bit(row, region[j])) rows[row][zj >> 6] |= 1ull << (zj & 63);
      }
    }
    return rows;
  }

  // Full GF(2) rank and pairwise commutation; debug-level consistency check.
  bool valid() const {
    for (int a = 0; a < n_; ++a) {
      // Hermiticity: phase parity matches the Y-count parity.
      int ycount = 0;
      const std::size_t ba = static_cast<std::size_t>(a) * words_;
      for (int w = 0; w < words_; ++w) ycount += std::popcount(xs_[ba + w] & zs_[ba + w]);
      if ((phase_[a] & 1) != (ycount & 1)) return false;
      for (int b = a + 1; b < n_; ++b) {
        const std::size_t bb = static_cast<std::size_t>(b) * words_;
        int sym = 0;
        for (int w = 0; w < words_; ++w) {
          sym += std::popcount(xs_[ba + w] & zs_[bb + w]);
          sym += std::popcount(zs_[ba + w] & xs_[bb + w]);
        }
        if (sym % 2 != 0) return false;
      }
    }
    std::vector<int> all(n_);
    for (int i = 0; i < n_; ++i) all[i] = i;
    auto rows = restricted_rows(all);
    return gf2_rank(rows) == n_;
  }

  static int gf2_rank(std::vector<std::vector<std::uint64_t>>& rows) {
    if (rows.empty()) return 0;
    const int row_words = static_cast<int>(rows[0].size());
    int rank = 0;
    for (int w = 0; w < row_words && rank < static_cast<int>(rows.size()); ++w) {
      for (int bit = 0; bit < 64 && rank < static_cast<int>(rows.size()); ++bit) {
        const std::uint64_t mask = 1ull << bit;
        int pivot = -1;
        for (int r = rank; r < static_cast<int>(rows.size()); ++r) {
          if (rows[r][w] & mask) {
            pivot = r;
            break;
          }
        }
        if (pivot < 0) continue;
        std::swap(rows[rank], rows[pivot]);
        for (int r = rank + 1; r < static_cast<int>(rows.size()); ++r) {
          if (rows[r][w] & mask) {
            for (int ww = w; ww < row_words; ++ww) rows[r][ww] ^= rows[rank][ww];
          }
        }
        ++rank;
      }
    }
    return rank;
  }

 private:
  std::size_t idx(int row, int word) const {
    return static_cast<std::size_t>(row) * words_ + word;
  }
  void set_z_bit(int row, int q) { zs_[idx(row, q >> 6)] |= 1ull << (q & 63); }
  void assign_bit(std::vector<std::uint64_t>& block, int row, int q, int value) {
    const std::uint64_t mask = 1ull << (q & 63);
    if (value) {
      block[idx(row, q >> 6)] |= mask;
    } else {
      block[idx(row, q >> 6)] &= ~mask;
    }
  }
  void clear_row(int row) {
    const std::size_t b = static_cast<std::size_t>(row) * words_;
    for (int w = 0; w < words_; ++w) {
      xs_[b + w] = 0;
      zs_[b + w] = 0;
    }
    phase_[row] = 0;
  }

  int n_;
  int words_;
  std::vector<std::uint64_t> xs_, zs_;
  std::vector<std::uint8_t> phase_;
};

// Subsystem entropy of a stabilizer state in nats:
//   S = (rank of generators restricted to the region - |region|) * ln 2.
inline double stabilizer_entropy(const StabilizerTableau& tab, std::span<const int> region) {
  if (region.empty()) throw std::invalid_argument("stabilizer_entropy: empty region");
  auto rows = tab.restricted_rows(region);
  const int rank = StabilizerTableau::gf2_rank(rows);
  return (rank - static_cast<int>(region.size())) * std::numbers::ln2;
}

inline double mutual_information(const StabilizerTableau& tab, std::span<const int> a,
                                 std::span<const int> b) {
  std::vector<bool> seen(tab.n_qubits(), false);
  std::vector<int> joint;
  joint.reserve(a.size() + b.size());
  for (int q : a) {
    seen[q] = true;
    joint.push_back(q);
  }
  for (int q : b) {
    if (seen[q]) throw std::invalid_argument("mutual_information: regions overlap");
    joint.push_back(q);
  }
  return stabilizer_entropy(tab, a) + stabilizer_entropy(tab, b) -
         stabilizer_entropy(tab, joint);
}

struct CliffordConfig {
  int sites = 64;          // L (periodic chain)
  int cluster_size = 2;    // N qubits per site; pairing uses floor(N/2) pairs
  double measure_prob = 0.1;
  std::uint64_t seed = 0;
  int region_len = 4;      // sites per region; A starts at 0, B antipodal

  int n_qubits() const { return sites * cluster_size; }

  void validate() const {
    if (sites < 2) throw std::invalid_argument("clifford: need at least 2 sites");
    if (cluster_size < 1) throw std::invalid_argument("clifford: cluster size must be >= 1");
    if (measure_prob < 0.0 || measure_prob > 1.0) {
      throw std::invalid_argument("clifford: measurement probability must be in [0, 1]");
    }
    if (region_len < 1 || 2 * region_len > sites) {
      throw std::invalid_argument("clifford: region length too large for the chain");
    }
  }

  std::vector<int> region_a_qubits() const { return region_qubits(0); }
  std::vector<int> region_b_qubits() const { return region_qubits(sites / 2); }

 private:
  std::vector<int> region_qubits(int first_site) const {
    std::vector<int> qs;
    qs.reserve(static_cast<std::size_t>(region_len) * cluster_size);
    for (int s = 0; s < region_len; ++s) {
      for (int j = 0; j < cluster_size; ++j) {
        qs.push_back(((first_site + s) % sites) * cluster_size + j);
      }
    }
    return qs;
  }
};

// One time step: random pairings inside every cluster, one random gate per
// neighboring-site bond (periodic), then full-cluster Z measurements with
// probability p per site.
inline void clifford_step(StabilizerTableau& tab, const CliffordConfig& cfg, Rng& rng) {
  const int l = cfg.sites, n = cfg.cluster_size;
  std::vector<int> members(n);
  for (int s = 0; s < l; ++s) {
    for (int j = 0; j < n; ++j) members[j] = j;
    rng.shuffle(members);
    for (int pair = 0; pair + 1 < n; pair += 2) {
      const TwoQubitClifford cl = random_two_qubit_clifford(rng);
      tab.apply_two_qubit(cl, s * n + members[pair], s * n + members[pair + 1]);
    }
  }
  for (int s = 0; s < l; ++s) {
    const int t = (s + 1) % l;
    const int qa = s * n + static_cast<int>(rng.below(n));
    const int qb = t * n + static_cast<int>(rng.below(n));
    const TwoQubitClifford cl = random_two_qubit_clifford(rng);
    tab.apply_two_qubit(cl, qa, qb);
  }
  for (int s = 0; s < l; ++s) {
    if (rng.bernoulli(cfg.measure_prob)) {
      for (int j = 0; j < n; ++j) tab.measure_z(s * n + j, rng);
    }
  }
}

// Steady-state I_AB for one circuit realization: 4L burn-in steps, then the
// average over 2L further steps.
inline double steady_state_mutual_information(const CliffordConfig& cfg, Rng& rng) {
  cfg.validate();
  StabilizerTableau tab(cfg.n_qubits());
  const int burn = 4 * cfg.sites;
  const int window = 2 * cfg.sites;
  for (int t = 0; t < burn; ++t) clifford_step(tab, cfg, rng);
  const std::vector<int> a = cfg.region_a_qubits();
  const std::vector<int> b = cfg.region_b_qubits();
  double acc = 0.0;
  for (int t = 0; t < window; ++t) {
    clifford_step(tab, cfg, rng);
    acc += mutual_information(tab, a, b);
  }
  return acc / window;
}

}  // namespace cvsim
