#pragma once

// External-source measures and Wigner entry laws.
//
// AtomicMeasure is the limiting spectral law of the diagonal source,
// sum_i p_i delta_{a_i}. DiagonalRealization is its finite-n counterpart D_n.
// EntryDistribution describes the law of the Wigner entries together with the
// moment bookkeeping used to decide which ensembles may be compared.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dwl/error.hpp"

namespace dwl {

using cplx = std::complex<double>;

struct Atom {
  double location;
  double weight;
};

class AtomicMeasure {
 public:
  /// Validates, sorts by location and renormalizes the weights to sum to one.
  /// Throws InvalidArgument on duplicate locations, non-positive weights,
  /// non-finite input or a weight total off by more than 1e-9.
  static AtomicMeasure from_atoms(std::span<const Atom> atoms) {
    if (atoms.empty()) throw InvalidArgument("atomic measure needs at least one atom");
    std::vector<Atom> sorted(atoms.begin(), atoms.end());
    double total = 0.0;
    for (const auto& a : sorted) {
      if (!std::isfinite(a.location) || !std::isfinite(a.weight))
        throw InvalidArgument("atom location and weight must be finite");
      if (a.weight <= 0.0) throw InvalidArgument("atom weights must be positive");
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
      throw InvalidArgument("atom weights sum to " + std::to_string(total) + ", expected 1");
    std::sort(sorted.begin(), sorted.end(),
              [](const Atom& x, const Atom& y) { return x.location < y.location; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i].location == sorted[i - 1].location)
        throw InvalidArgument("duplicate atom location " + std::to_string(sorted[i].location));
    }
    for (auto& a : sorted) a.weight /= total;
    AtomicMeasure m;
    m.atoms_ = std::move(sorted);
    return m;
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }

  double max_abs_location() const {
    double r = 0.0;
    for (const auto& a : atoms_) r = std::max(r, std::abs(a.location));
    return r;
  }

  bool is_symmetric(double tol = 1e-14) const {
    const std::size_t l = atoms_.size();
    for (std::size_t i = 0; i < l; ++i) {
      const auto& lo = atoms_[i];
      const auto& hi = atoms_[l - 1 - i];
      if (std::abs(lo.location + hi.location) > tol || std::abs(lo.weight - hi.weight) > tol)
        return false;
    }
    return true;
  }

  friend bool operator==(const AtomicMeasure& x, const AtomicMeasure& y) {
    return std::equal(x.atoms_.begin(), x.atoms_.end(), y.atoms_.begin(), y.atoms_.end(),
                      [](const Atom& a, const Atom& b) {
                        return a.location == b.location && a.weight == b.weight;
                      });
  }

 private:
  AtomicMeasure() = default;
  std::vector<Atom> atoms_;
};

inline AtomicMeasure make_measure(std::span<const Atom> atoms) {
  return AtomicMeasure::from_atoms(atoms);
}

inline AtomicMeasure make_measure(std::initializer_list<Atom> atoms) {
  return AtomicMeasure::from_atoms(std::span<const Atom>(atoms.begin(), atoms.size()));
}

namespace detail {

inline double parse_double(std::string_view text, std::string_view what) {
  const auto first = text.find_first_not_of(" \t");
  const auto last = text.find_last_not_of(" \t");
  if (first == std::string_view::npos) throw InvalidArgument("empty " + std::string(what));
  text = text.substr(first, last - first + 1);
  double value = 0.0;
  // from_chars rejects a leading '+', accept it for convenience.
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw InvalidArgument("cannot parse " + std::string(what) + " '" + std::string(text) + "'");
  return value;
}

}  // namespace detail

/// Parses "loc:weight,loc:weight", e.g. "-2:0.5,2:0.5".
inline AtomicMeasure parse_atoms(std::string_view text) {
  std::vector<Atom> atoms;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string_view item =
        text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    const std::size_t colon = item.find(':');
    if (colon == std::string_view::npos)
      throw InvalidArgument("atom '" + std::string(item) + "' is not of the form loc:weight");
    atoms.push_back({detail::parse_double(item.substr(0, colon), "atom location"),
                     detail::parse_double(item.substr(colon + 1), "atom weight")});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return make_measure(atoms);
}

inline std::string format_atoms(const AtomicMeasure& measure) {
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (const auto& a : measure.atoms()) {
    if (!first) out << ',';
    out << a.location << ':' << a.weight;
    first = false;
  }
  return out.str();
}

/// Stieltjes transform sum_i p_i / (a_i - z) without the half-plane check.
inline cplx atom_transform(const AtomicMeasure& measure, cplx z) {
  cplx g{0.0, 0.0};
  for (const auto& a : measure.atoms()) g += a.weight / (a.location - z);
  return g;
}

/// g(z) = sum_i p_i / (a_i - z) for Im z > 0.
inline cplx stieltjes_of_atoms(const AtomicMeasure& measure, cplx z) {
  if (!(z.imag() > 0.0)) throw InvalidArgument("stieltjes_of_atoms requires Im z > 0");
  return atom_transform(measure, z);
}

// ---------------------------------------------------------------------------
// Finite-n diagonal

struct DiagonalRealization {
  int n = 0;
  std::vector<double> entries;           // sorted, each equal to an atom location
  std::vector<int> multiplicities;       // per atom, in location order
  std::vector<double> realized_weights;  // multiplicity / n

  friend bool operator==(const DiagonalRealization&, const DiagonalRealization&) = default;

  /// Largest deviation |p_i^(n) - p_i| against the source measure.
  double weight_error(const AtomicMeasure& measure) const {
    double err = 0.0;
    for (std::size_t i = 0; i < measure.size(); ++i)
      err = std::max(err, std::abs(realized_weights[i] - measure.atoms()[i].weight));
    return err;
  }

  /// The empirical measure mu_{D_n}; atoms with zero multiplicity are dropped.
  AtomicMeasure empirical_measure(const AtomicMeasure& source) const {
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < source.size(); ++i) {
      if (multiplicities[i] > 0)
        atoms.push_back({source.atoms()[i].location, static_cast<double>(multiplicities[i]) / n});
    }
    return make_measure(atoms);
  }
};

/// Rounds n p_i to integer multiplicities by the largest-remainder method.
/// Ties in the remainder go to the atom with the smaller location, so the
/// result is deterministic and |p_i^(n) - p_i| < 1/n.
inline DiagonalRealization realize_diagonal(const AtomicMeasure& measure, int n) {
  const std::size_t l = measure.size();
  if (n < static_cast<int>(l))
    throw InvalidArgument("realize_diagonal: n = " + std::to_string(n) + " is smaller than the " +
                          std::to_string(l) + " atoms");
  DiagonalRealization d;
  d.n = n;
  d.multiplicities.resize(l);
  std::vector<double> remainder(l);
  int assigned = 0;
  for (std::size_t i = 0; i < l; ++i) {
    const double exact = n * measure.atoms()[i].weight;
    d.multiplicities[i] = static_cast<int>(std::floor(exact));
    remainder[i] = exact - d.multiplicities[i];
    assigned += d.multiplicities[i];
  }
  std::vector<std::size_t> order(l);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    if (std::abs(remainder[x] - remainder[y]) > 1e-12) return remainder[x] > remainder[y];
    return x < y;
  });
  for (int k = 0; assigned < n; ++k, ++assigned) ++d.multiplicities[order[static_cast<std::size_t>(k) % l]];

  d.entries.reserve(static_cast<std::size_t>(n));
  d.realized_weights.resize(l);
  for (std::size_t i = 0; i < l; ++i) {
    d.entries.insert(d.entries.end(), static_cast<std::size_t>(d.multiplicities[i]),
                     measure.atoms()[i].location);
    d.realized_weights[i] = static_cast<double>(d.multiplicities[i]) / n;
  }
  return d;
}

// ---------------------------------------------------------------------------
// Entry laws

enum class EntryKind {
  GaussianReal,
  GaussianComplex,
  Rademacher,
  Matched4Real,
  Matched4Complex,
  Discrete,
  // Control law outside condition C0: mu + sqrt(1 - mu^2) * (GUE entry).
  ShiftedComplex,
};

struct MixedMoment {
  int re_power;
  int im_power;
  double value;  // E[Re(zeta)^re_power Im(zeta)^im_power]
};

/// Law of the Wigner entries. Off-diagonal entries have mean zero and unit
/// variance; diagonal entries are real with variance `diagonal_variance()`.
class EntryDistribution {
 public:
  static EntryDistribution gaussian_real(double sigma2 = 2.0) {
    return {EntryKind::GaussianReal, sigma2};
  }
  static EntryDistribution gaussian_complex(double sigma2 = 1.0) {
    return {EntryKind::GaussianComplex, sigma2};
  }
  static EntryDistribution rademacher(double sigma2 = 1.0) { return {EntryKind::Rademacher, sigma2}; }
  static EntryDistribution matched4_real(double sigma2 = 1.0) {
    return {EntryKind::Matched4Real, sigma2};
  }
  static EntryDistribution matched4_complex(double sigma2 = 1.0) {
    return {EntryKind::Matched4Complex, sigma2};
  }

  /// Real law on finitely many points; must have mean 0 and variance 1.
  static EntryDistribution discrete(std::vector<double> points, std::vector<double> probabilities,
                                    double sigma2 = 1.0) {
    if (points.empty() || points.size() != probabilities.size())
      throw InvalidArgument("discrete law needs matching, non-empty point and probability lists");
    double total = 0.0, mean = 0.0, second = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (!(probabilities[i] > 0.0) || !std::isfinite(points[i]))
        throw InvalidArgument("discrete law needs positive probabilities and finite points");
      total += probabilities[i];
      mean += probabilities[i] * points[i];
      second += probabilities[i] * points[i] * points[i];
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("discrete probabilities must sum to 1");
    if (std::abs(mean) > 1e-9 || std::abs(second - 1.0) > 1e-9)
      throw InvalidArgument("discrete law must have mean 0 and variance 1");
    EntryDistribution d{EntryKind::Discrete, sigma2};
    d.points_ = std::move(points);
    d.probabilities_ = std::move(probabilities);
    return d;
  }

  /// Mean-shifted control: mu + sqrt(1 - mu^2) * g with g a GUE entry.
  /// Keeps E|zeta|^2 = 1 but violates the mean-zero requirement.
  static EntryDistribution shifted_complex(double shift, double sigma2 = 1.0) {
    if (!(std::abs(shift) < 1.0)) throw InvalidArgument("shift must lie in (-1, 1)");
    EntryDistribution d{EntryKind::ShiftedComplex, sigma2};
    d.shift_ = shift;
    return d;
  }

  /// Parses a kind name. "discrete" is not accepted here (it needs points);
  /// "shifted-complex" takes an optional ":mu" suffix, default 0.8.
  static EntryDistribution parse(std::string_view name, double sigma2 = -1.0) {
    auto pick = [&](double def) { return sigma2 > 0.0 ? sigma2 : def; };
    if (name == "gaussian-real") return gaussian_real(pick(2.0));
    if (name == "gaussian-complex") return gaussian_complex(pick(1.0));
    if (name == "rademacher") return rademacher(pick(1.0));
    if (name == "matched4-real") return matched4_real(pick(1.0));
    if (name == "matched4-complex") return matched4_complex(pick(1.0));
    if (name.starts_with("shifted-complex")) {
      double mu = 0.8;
      if (name.size() > 15) {
        if (name[15] != ':') throw InvalidArgument("unknown entry law '" + std::string(name) + "'");
        mu = detail::parse_double(name.substr(16), "shift");
      }
      return shifted_complex(mu, pick(1.0));
    }
    throw InvalidArgument("unknown entry law '" + std::string(name) + "'");
  }

  EntryKind kind() const { return kind_; }
  double diagonal_variance() const { return sigma2_; }
  double shift() const { return shift_; }
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& probabilities() const { return probabilities_; }

  bool is_complex() const {
    return kind_ == EntryKind::GaussianComplex || kind_ == EntryKind::Matched4Complex ||
           kind_ == EntryKind::ShiftedComplex;
  }

  /// Mean zero and unit variance off the diagonal, with bounded support or
  /// Gaussian tails.
  bool satisfies_c0() const { return kind_ != EntryKind::ShiftedComplex && sigma2_ > 0.0; }

  std::string name() const {
    switch (kind_) {
      case EntryKind::GaussianReal: return "gaussian-real";
      case EntryKind::GaussianComplex: return "gaussian-complex";
      case EntryKind::Rademacher: return "rademacher";
      case EntryKind::Matched4Real: return "matched4-real";
      case EntryKind::Matched4Complex: return "matched4-complex";
      case EntryKind::Discrete: return "discrete";
      case EntryKind::ShiftedComplex: {
        std::ostringstream out;
        out.precision(17);
        out << "shifted-complex:" << shift_;
        return out.str();
      }
    }
    return "unknown";
  }

  /// Moments E[X^p], p = 0..8, of the real standardized shape X underlying
  /// this law: the off-diagonal real part is X (real kinds) or X/sqrt(2)
  /// (complex kinds); the diagonal is sigma * X.
  std::vector<double> shape_moments() const {
    std::vector<double> mom(9, 0.0);
    for (int p = 0; p <= 8; ++p) {
      const bool even = p % 2 == 0;
      switch (kind_) {
        case EntryKind::GaussianReal:
        case EntryKind::GaussianComplex:
        case EntryKind::ShiftedComplex:
          mom[p] = even ? double_factorial(p - 1) : 0.0;
          break;
        case EntryKind::Rademacher:
          mom[p] = even ? 1.0 : 0.0;
          break;
        case EntryKind::Matched4Real:
        case EntryKind::Matched4Complex:
          // +-sqrt(3) w.p. 1/6 each, 0 w.p. 2/3.
          mom[p] = p == 0 ? 1.0 : (even ? std::pow(3.0, p / 2) / 3.0 : 0.0);
          break;
        case EntryKind::Discrete:
          for (std::size_t i = 0; i < points_.size(); ++i)
            mom[p] += probabilities_[i] * std::pow(points_[i], p);
          break;
      }
    }
    return mom;
  }

 private:
  EntryDistribution(EntryKind kind, double sigma2) : kind_(kind), sigma2_(sigma2) {
    if (!(sigma2 > 0.0)) throw InvalidArgument("diagonal variance must be positive");
  }

  static double double_factorial(int k) {
    double r = 1.0;
    for (; k > 1; k -= 2) r *= k;
    return r;
  }

  EntryKind kind_;
  double sigma2_;
  double shift_ = 0.0;
  std::vector<double> points_;
  std::vector<double> probabilities_;
};

namespace detail {

inline double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace detail

/// Mixed moments E[Re(zeta)^m Im(zeta)^l] of an off-diagonal entry for all
/// m + l <= k, ordered by total degree then by m descending. k <= 8.
inline std::vector<MixedMoment> moments(const EntryDistribution& dist, int k) {
  if (k < 0 || k > 8) throw InvalidArgument("moments: order must lie in [0, 8]");
  const auto shape = dist.shape_moments();
  std::vector<MixedMoment> out;
  for (int total = 0; total <= k; ++total) {
    for (int m = total; m >= 0; --m) {
      const int l = total - m;
      double value = 0.0;
      if (!dist.is_complex()) {
        value = l == 0 ? shape[m] : 0.0;
      } else if (dist.kind() == EntryKind::ShiftedComplex) {
        // Re = mu + c X, Im = c Y with c = sqrt((1 - mu^2) / 2), X, Y iid N(0,1).
        const double mu = dist.shift();
        const double c = std::sqrt((1.0 - mu * mu) / 2.0);
        double re = 0.0;
        for (int j = 0; j <= m; ++j)
          re += detail::binomial(m, j) * std::pow(mu, m - j) * std::pow(c, j) * shape[j];
        value = re * std::pow(c, l) * shape[l];
      } else {
        value = std::pow(0.5, 0.5 * total) * shape[m] * shape[l];
      }
      out.push_back({m, l, value});
    }
  }
  return out;
}

/// Moments E[zeta_ii^p], p = 0..k, of a diagonal entry (always real).
inline std::vector<double> diagonal_moments(const EntryDistribution& dist, int k) {
  if (k < 0 || k > 8) throw InvalidArgument("diagonal_moments: order must lie in [0, 8]");
  const auto shape = dist.shape_moments();
  const double sigma = std::sqrt(dist.diagonal_variance());
  std::vector<double> out(static_cast<std::size_t>(k) + 1);
  for (int p = 0; p <= k; ++p) out[p] = std::pow(sigma, p) * shape[p];
  return out;
}

inline constexpr int kMaxMatchOrder = 8;
inline constexpr double kMomentTolerance = 1e-10;

/// Largest k <= 8 such that the off-diagonal laws match to order k.
inline int match_order(const EntryDistribution& d1, const EntryDistribution& d2) {
  const auto a = moments(d1, kMaxMatchOrder);
  const auto b = moments(d2, kMaxMatchOrder);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i].value - b[i].value) > kMomentTolerance)
      return a[i].re_power + a[i].im_power - 1;
  }
  return kMaxMatchOrder;
}

/// Largest k <= 8 such that the diagonal laws match to order k.
inline int diagonal_match_order(const EntryDistribution& d1, const EntryDistribution& d2) {
  const auto a = diagonal_moments(d1, kMaxMatchOrder);
  const auto b = diagonal_moments(d2, kMaxMatchOrder);
  for (int p = 0; p <= kMaxMatchOrder; ++p) {
    if (std::abs(a[p] - b[p]) > kMomentTolerance) return p - 1;
  }
  return kMaxMatchOrder;
}

}  // namespace dwl
