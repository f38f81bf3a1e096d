#pragma once

// Fourier representation of real fields on the torus (R / 2πZ)^2.
//
// A field is stored by its coefficients f̂(n) for n in {-n/2+1, ..., n/2}^2,
// laid out row-major in FFT order (index k maps to mode k for k <= n/2 and
// k - n otherwise). The torus carries the normalized Lebesgue measure, so
//
//     f(x) = Σ_n f̂(n) e^{i n·x},     ‖f‖_{L²}² = Σ_n |f̂(n)|².

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace sigwave {

using Complex = std::complex<double>;

/// Physical-space samples of a real field, row-major n_grid × n_grid.
using RealGrid = std::vector<double>;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct GridSpec {
  int n_grid = 0;
  double mass = 1.0;

  /// Validating constructor: n_grid even and >= 4, mass > 0.
  static GridSpec make(int n_grid, double mass);

  int nyquist() const { return n_grid / 2; }
  std::size_t size() const { return static_cast<std::size_t>(n_grid) * n_grid; }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

struct Mode {
  int k1 = 0;
  int k2 = 0;
  int norm_sq() const { return k1 * k1 + k2 * k2; }
};

class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return coeffs_.size(); }

  std::size_t index(int k1, int k2) const;
  Mode mode(std::size_t idx) const;
  /// Index of the mode -n (mod n_grid).
  std::size_t conj_index(std::size_t idx) const;

  Complex& at(int k1, int k2) { return coeffs_[index(k1, k2)]; }
  const Complex& at(int k1, int k2) const { return coeffs_[index(k1, k2)]; }
  Complex& operator[](std::size_t i) { return coeffs_[i]; }
  const Complex& operator[](std::size_t i) const { return coeffs_[i]; }

  std::span<Complex> coeffs() { return coeffs_; }
  std::span<const Complex> coeffs() const { return coeffs_; }

  SpectralField& operator+=(const SpectralField& other);
  SpectralField& operator-=(const SpectralField& other);
  SpectralField& operator*=(double scale);
  /// this += scale * other
  SpectralField& axpy(double scale, const SpectralField& other);

  void set_zero();
  bool is_zero() const;

  /// Largest |f̂(n) - conj f̂(-n)| over all modes.
  double hermitian_defect() const;
  /// Replace f̂(n) by (f̂(n) + conj f̂(-n)) / 2.
  void symmetrize();

  /// Throws GridError if `other` lives on a different grid.
  void require_same_grid(const SpectralField& other) const;

 private:
  GridSpec spec_{};
  std::vector<Complex> coeffs_;
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(double s, SpectralField a);

struct PairState {
  SpectralField pos;
  SpectralField vel;

  PairState() = default;
  explicit PairState(const GridSpec& spec) : pos(spec), vel(spec) {}
  PairState(SpectralField p, SpectralField v);

  const GridSpec& spec() const { return pos.spec(); }
};

struct ComponentEnsemble {
  std::vector<PairState> components;

  ComponentEnsemble() = default;
  ComponentEnsemble(const GridSpec& spec, std::size_t count);
  explicit ComponentEnsemble(std::vector<PairState> comps);

  std::size_t size() const { return components.size(); }
  const GridSpec& spec() const;
  PairState& operator[](std::size_t j) { return components[j]; }
  const PairState& operator[](std::size_t j) const { return components[j]; }
};

// Forward/inverse transforms, normalized so that from_physical(to_physical(f)) == f.
RealGrid to_physical(const SpectralField& f);
void to_physical(const SpectralField& f, std::span<double> out);
SpectralField from_physical(const GridSpec& spec, std::span<const double> values);
void from_physical(std::span<const double> values, SpectralField& out);

/// P_M: keep |n| <= M.
SpectralField project(const SpectralField& f, double M);
/// Id - P_M.
SpectralField project_perp(const SpectralField& f, double M);
/// Keep modes with |k1|, |k2| <= n_grid / 3 (two-thirds rule).
SpectralField dealias(const SpectralField& f);
bool in_dealias_set(const GridSpec& spec, const Mode& n);
/// Zero modes touching the Nyquist row or column.
void zero_nyquist(SpectralField& f);

/// Smoothing multiplier of the I-operator: 1 for |n| <= M, (M/|n|)^{1-s} beyond.
double i_multiplier(double s, double M, double abs_n);
SpectralField apply_i_operator(const SpectralField& f, double s, double M);

/// |n| <= radius; a negative radius contains no mode.
inline bool within_radius(const Mode& n, double radius) {
  return radius >= 0.0 && n.norm_sq() <= radius * radius;
}

/// ⟨n⟩ = sqrt(1 + |n|²).
inline double japanese_bracket(const Mode& n) { return std::sqrt(1.0 + n.norm_sq()); }

/// ‖f‖_{H^s} = (Σ ⟨n⟩^{2s} |f̂(n)|²)^{1/2}.
double sobolev_norm(const SpectralField& f, double s);
/// ‖(u, ∂_t u)‖_{ℋ^s} = (‖u‖²_{H^s} + ‖∂_t u‖²_{H^{s-1}})^{1/2}.
double pair_sobolev_norm(const PairState& p, double s);
/// Grid proxy for ‖f‖_{W^{s,∞}}: max over grid points of |⟨∇⟩^s f|.
double sup_sobolev_norm(const SpectralField& f, double s);

/// ℓ²-average (N^{-1} Σ v_j²)^{1/2}.
double a_n_norm(std::span<const double> values);
/// Double-index ℓ²-average (N^{-2} Σ_{j,k} v_{jk}²)^{1/2}; `values` is N×N row-major.
double a_n2_norm(std::span<const double> values, std::size_t n);

}  // namespace sigwave
