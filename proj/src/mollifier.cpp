#include "lfpp/mollifier.hpp"

#include <cmath>
#include <complex>
#include <memory>

#include "fft.hpp"
#include "lfpp/error.hpp"

namespace lfpp {

Eigen::ArrayXXd kernel_table(double epsilon, double spacing) {
  require(std::isfinite(spacing) && spacing > 0, "kernel_table: spacing must be positive");
  require(std::isfinite(epsilon) && epsilon >= spacing * (1.0 - 1e-12),
          "kernel_table: epsilon must be >= spacing");
  const double cutoff = kKernelTruncation * epsilon / spacing;
  const int radius = static_cast<int>(std::floor(cutoff + 1e-12));
  const int width = 2 * radius + 1;
  // p_s(z) with s = eps^2/2 is proportional to exp(-|z|^2 / eps^2); the
  // 1/(pi eps^2) prefactor cancels in the renormalization.
  const double inv = (spacing * spacing) / (epsilon * epsilon);
  Eigen::ArrayXXd table = Eigen::ArrayXXd::Zero(width, width);
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      const double d2 = static_cast<double>(dx) * dx + static_cast<double>(dy) * dy;
      if (d2 > cutoff * cutoff * (1 + 1e-12)) continue;
      table(radius + dy, radius + dx) = std::exp(-d2 * inv);
    }
  }
  return table / table.sum();
}

MollifiedField mollify(const FieldGrid& field, double epsilon) {
  const GridSpec& spec = field.spec;
  spec.validate();
  require(std::isfinite(epsilon) && epsilon >= spec.spacing * (1.0 - 1e-12) &&
              epsilon <= spec.extent() / 8.0,
          "mollify: epsilon must lie in [spacing, extent/8]");

  const Eigen::ArrayXXd kernel = kernel_table(epsilon, spec.spacing);
  const int radius = static_cast<int>(kernel.rows() / 2);
  const int n = spec.n_cells;
  int size = detail::next_smooth_size(n + radius);
  if (size % 2) size = detail::next_smooth_size(size + 1);
  const int half = size / 2 + 1;
  const auto real_count = static_cast<std::size_t>(size) * size;
  const auto complex_count = static_cast<std::size_t>(size) * half;

  detail::FftwBuffer<double> real_buf(real_count);
  detail::FftwBuffer<fftw_complex> field_hat(complex_count);
  detail::FftwBuffer<fftw_complex> kernel_hat(complex_count);

  std::unique_ptr<detail::FftwPlan> forward_field, forward_kernel, backward;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_field = std::make_unique<detail::FftwPlan>(fftw_plan_dft_r2c_2d(
        size, size, real_buf.data(), field_hat.data(), FFTW_ESTIMATE));
    forward_kernel = std::make_unique<detail::FftwPlan>(fftw_plan_dft_r2c_2d(
        size, size, real_buf.data(), kernel_hat.data(), FFTW_ESTIMATE));
    backward = std::make_unique<detail::FftwPlan>(fftw_plan_dft_c2r_2d(
        size, size, field_hat.data(), real_buf.data(), FFTW_ESTIMATE));
  }

  std::fill(real_buf.data(), real_buf.data() + real_count, 0.0);
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      const int row = (dy + size) % size;
      const int col = (dx + size) % size;
      real_buf[static_cast<std::size_t>(row) * size + col] = kernel(radius + dy, radius + dx);
    }
  forward_kernel->execute();

  std::fill(real_buf.data(), real_buf.data() + real_count, 0.0);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      real_buf[static_cast<std::size_t>(iy) * size + ix] = field.values(iy, ix);
  forward_field->execute();

  for (std::size_t i = 0; i < complex_count; ++i) {
    const std::complex<double> a(field_hat[i][0], field_hat[i][1]);
    const std::complex<double> b(kernel_hat[i][0], kernel_hat[i][1]);
    const std::complex<double> c = a * b;
    field_hat[i][0] = c.real();
    field_hat[i][1] = c.imag();
  }
  backward->execute();

  MollifiedField out{FieldGrid{spec, GridArray<double>(n, n), field.boundary_condition, field.seed},
                     epsilon};
  const double norm = 1.0 / static_cast<double>(real_count);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix)
      out.field.values(iy, ix) = norm * real_buf[static_cast<std::size_t>(iy) * size + ix];
  return out;
}

}  // namespace lfpp
