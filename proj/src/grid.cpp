#include "sigwave/grid.hpp"

#include <algorithm>
#include <string>

namespace sigwave {

GridSpec GridSpec::make(int n_grid, double mass) {
  if (n_grid < 4 || n_grid % 2 != 0) {
    throw GridError("n_grid must be even and >= 4, got " + std::to_string(n_grid));
  }
  if (!(mass > 0.0)) throw GridError("mass must be positive");
  return GridSpec{n_grid, mass};
}

SpectralField::SpectralField(const GridSpec& spec) : spec_(spec), coeffs_(spec.size()) {}

std::size_t SpectralField::index(int k1, int k2) const {
  const int n = spec_.n_grid;
  const int i1 = ((k1 % n) + n) % n;
  const int i2 = ((k2 % n) + n) % n;
  return static_cast<std::size_t>(i1) * n + i2;
}

Mode SpectralField::mode(std::size_t idx) const {
  const int n = spec_.n_grid;
  const int half = n / 2;
  int i1 = static_cast<int>(idx / n);
  int i2 = static_cast<int>(idx % n);
  return Mode{i1 <= half ? i1 : i1 - n, i2 <= half ? i2 : i2 - n};
}

std::size_t SpectralField::conj_index(std::size_t idx) const {
  const auto n = static_cast<std::size_t>(spec_.n_grid);
  const std::size_t i1 = idx / n;
  const std::size_t i2 = idx % n;
  return ((n - i1) % n) * n + (n - i2) % n;
}

void SpectralField::require_same_grid(const SpectralField& other) const {
  if (!(spec_ == other.spec_)) throw GridError("fields live on different grids");
}

SpectralField& SpectralField::operator+=(const SpectralField& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(double scale) {
  for (auto& c : coeffs_) c *= scale;
  return *this;
}

SpectralField& SpectralField::axpy(double scale, const SpectralField& other) {
  require_same_grid(other);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += scale * other.coeffs_[i];
  return *this;
}

void SpectralField::set_zero() { std::fill(coeffs_.begin(), coeffs_.end(), Complex{}); }

bool SpectralField::is_zero() const {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Complex& c) { return c == Complex{}; });
}

double SpectralField::hermitian_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    worst = std::max(worst, std::abs(coeffs_[i] - std::conj(coeffs_[conj_index(i)])));
  }
  return worst;
}

void SpectralField::symmetrize() {
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const std::size_t j = conj_index(i);
    if (j < i) continue;
    const Complex avg = 0.5 * (coeffs_[i] + std::conj(coeffs_[j]));
    coeffs_[i] = avg;
    coeffs_[j] = std::conj(avg);
  }
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(double s, SpectralField a) { return a *= s; }

PairState::PairState(SpectralField p, SpectralField v) : pos(std::move(p)), vel(std::move(v)) {
  pos.require_same_grid(vel);
}

ComponentEnsemble::ComponentEnsemble(const GridSpec& spec, std::size_t count)
    : components(count, PairState(spec)) {
  if (count == 0) throw GridError("an ensemble needs at least one component");
}

ComponentEnsemble::ComponentEnsemble(std::vector<PairState> comps) : components(std::move(comps)) {
  if (components.empty()) throw GridError("an ensemble needs at least one component");
  for (const auto& c : components) {
    components.front().pos.require_same_grid(c.pos);
    components.front().pos.require_same_grid(c.vel);
  }
}

const GridSpec& ComponentEnsemble::spec() const {
  if (components.empty()) throw GridError("empty ensemble has no grid");
  return components.front().spec();
}

namespace {

template <typename Keep>
SpectralField filtered(const SpectralField& f, Keep keep) {
  SpectralField out(f.spec());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (keep(f.mode(i))) out[i] = f[i];
  }
  return out;
}

}  // namespace

SpectralField project(const SpectralField& f, double M) {
  return filtered(f, [M](const Mode& n) { return within_radius(n, M); });
}

SpectralField project_perp(const SpectralField& f, double M) {
  return filtered(f, [M](const Mode& n) { return !within_radius(n, M); });
}

bool in_dealias_set(const GridSpec& spec, const Mode& n) {
  const int cut = spec.n_grid / 3;
  return std::abs(n.k1) <= cut && std::abs(n.k2) <= cut;
}

SpectralField dealias(const SpectralField& f) {
  const GridSpec spec = f.spec();
  return filtered(f, [&spec](const Mode& n) { return in_dealias_set(spec, n); });
}

void zero_nyquist(SpectralField& f) {
  const int nyq = f.spec().nyquist();
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Mode n = f.mode(i);
    if (n.k1 == nyq || n.k2 == nyq) f[i] = Complex{};
  }
}

double i_multiplier(double s, double M, double abs_n) {
  if (abs_n <= M) return 1.0;
  return std::pow(M / abs_n, 1.0 - s);
}

SpectralField apply_i_operator(const SpectralField& f, double s, double M) {
  SpectralField out(f.spec());
  for (std::size_t i = 0; i < f.size(); ++i) {
    out[i] = i_multiplier(s, M, std::sqrt(static_cast<double>(f.mode(i).norm_sq()))) * f[i];
  }
  return out;
}

double sobolev_norm(const SpectralField& f, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double w = std::pow(1.0 + f.mode(i).norm_sq(), s);
    acc += w * std::norm(f[i]);
  }
  return std::sqrt(acc);
}

double pair_sobolev_norm(const PairState& p, double s) {
  const double a = sobolev_norm(p.pos, s);
  const double b = sobolev_norm(p.vel, s - 1.0);
  return std::sqrt(a * a + b * b);
}

double sup_sobolev_norm(const SpectralField& f, double s) {
  SpectralField g(f.spec());
  for (std::size_t i = 0; i < f.size(); ++i) {
    g[i] = std::pow(1.0 + f.mode(i).norm_sq(), 0.5 * s) * f[i];
  }
  const RealGrid values = to_physical(g);
  double worst = 0.0;
  for (double v : values) worst = std::max(worst, std::abs(v));
  return worst;
}

double a_n_norm(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("a_n_norm: empty input");
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc / static_cast<double>(values.size()));
}

double a_n2_norm(std::span<const double> values, std::size_t n) {
  if (n == 0 || values.size() != n * n) throw std::invalid_argument("a_n2_norm: expected N×N values");
  double acc = 0.0;
  for (double v : values) acc += v * v;
  return std::sqrt(acc / static_cast<double>(n * n));
}

}  // namespace sigwave
