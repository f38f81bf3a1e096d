#include <fftw3.h>

#include <map>
#include <mutex>

#include "sigwave/grid.hpp"

namespace sigwave {
namespace {

struct Plans {
  fftw_plan backward = nullptr;  // synthesis: coefficients -> samples
  fftw_plan forward = nullptr;   // analysis: samples -> coefficients
};

// The planner is not thread-safe; execution with fftw_execute_dft is.
const Plans& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, Plans> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<fftw_complex> a(static_cast<std::size_t>(n) * n);
  std::vector<fftw_complex> b(a.size());
  Plans p;
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  p.backward = fftw_plan_dft_2d(n, n, a.data(), b.data(), FFTW_BACKWARD, flags);
  p.forward = fftw_plan_dft_2d(n, n, a.data(), b.data(), FFTW_FORWARD, flags);
  return cache.emplace(n, p).first->second;
}

std::vector<Complex>& scratch(std::size_t size) {
  thread_local std::vector<Complex> buf;
  if (buf.size() != size) buf.assign(size, Complex{});
  return buf;
}

std::vector<Complex>& scratch2(std::size_t size) {
  thread_local std::vector<Complex> buf;
  if (buf.size() != size) buf.assign(size, Complex{});
  return buf;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

void to_physical(const SpectralField& f, std::span<double> out) {
  const auto& spec = f.spec();
  if (out.size() != spec.size()) throw GridError("to_physical: output size mismatch");
  auto& in = scratch(spec.size());
  auto& res = scratch2(spec.size());
  std::copy(f.coeffs().begin(), f.coeffs().end(), in.begin());
  fftw_execute_dft(plans_for(spec.n_grid).backward, as_fftw(in.data()), as_fftw(res.data()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = res[i].real();
}

RealGrid to_physical(const SpectralField& f) {
  RealGrid out(f.spec().size());
  to_physical(f, out);
  return out;
}

void from_physical(std::span<const double> values, SpectralField& out) {
  const auto& spec = out.spec();
  if (values.size() != spec.size()) throw GridError("from_physical: input size mismatch");
  auto& in = scratch(spec.size());
  for (std::size_t i = 0; i < values.size(); ++i) in[i] = Complex(values[i], 0.0);
  fftw_execute_dft(plans_for(spec.n_grid).forward, as_fftw(in.data()), as_fftw(out.coeffs().data()));
  const double scale = 1.0 / static_cast<double>(spec.size());
  for (auto& c : out.coeffs()) c *= scale;
}

SpectralField from_physical(const GridSpec& spec, std::span<const double> values) {
  SpectralField out(spec);
  from_physical(values, out);
  return out;
}

}  // namespace sigwave
