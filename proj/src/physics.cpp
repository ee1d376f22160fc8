#include "thermonet/physics.hpp"

#include <cmath>
#include <stdexcept>

namespace thermonet {

double PhysicsParams::effective_a12() const {
  const double a = a12();
  if (std::abs(a) >= a12_floor) return a;
  return a < 0.0 ? -a12_floor : a12_floor;
}

bool PhysicsParams::a12_below_floor() const { return std::abs(a12()) < a12_floor; }

std::size_t PhysicsParams::trainable_count() const {
  std::size_t n = 0;
  for (bool t : trainable) n += t ? 1 : 0;
  return n;
}

void PhysicsParams::write_trainables(std::span<double> out) const {
  if (out.size() != trainable_count()) throw std::invalid_argument("PhysicsParams: span size");
  std::size_t o = 0;
  for (std::size_t i = 0; i < kCount; ++i) {
    if (trainable[i]) out[o++] = values[i];
  }
}

void PhysicsParams::read_trainables(std::span<const double> in) {
  if (in.size() != trainable_count()) throw std::invalid_argument("PhysicsParams: span size");
  std::size_t o = 0;
  for (std::size_t i = 0; i < kCount; ++i) {
    if (trainable[i]) values[i] = in[o++];
  }
}

bool PhysicsParams::project() {
  if (!a12_below_floor()) return false;
  values[1] = effective_a12();
  return true;
}

PhysicsParams params_from_rc(const ThermalParams& tp) {
  tp.validate();
  PhysicsParams pp;
  pp.values[0] = 1.0 / (tp.C_r * tp.R_ra) + 1.0 / (tp.C_r * tp.R_rm);
  pp.values[1] = 1.0 / (tp.C_r * tp.R_rm);
  pp.values[2] = 1.0 / (tp.C_m * tp.R_rm);
  pp.values[3] = 1.0 / (tp.C_m * tp.R_rm);
  pp.values[4] = tp.b_gain;
  pp.values[5] = 1.0 / (tp.C_r * tp.R_ra);
  return pp;
}

HiddenStateTarget hidden_state_target(double T_r_i, double T_r_next, double T_r_hat_i,
                                      double u_phys_hat_i, double T_a_i, const PhysicsParams& pp,
                                      double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("hidden_state_target: dt must be > 0");
  const double dT_r = (T_r_next - T_r_i) / dt;
  const double numerator = dT_r + pp.a11() * T_r_hat_i - pp.b() * u_phys_hat_i - pp.c13() * T_a_i;
  return {numerator / pp.effective_a12(), pp.a12_below_floor()};
}

PhysicsBatch make_physics_batch(const Dataset& ds, std::span<const std::size_t> positions) {
  PhysicsBatch b;
  const auto B = static_cast<Eigen::Index>(positions.size());
  b.positions.assign(positions.begin(), positions.end());
  b.paired_positions.reserve(positions.size());
  b.T_r.resize(B);
  b.T_r_next.resize(B);
  b.T_a.resize(B);
  b.dt = ds.dt_action;
  for (Eigen::Index c = 0; c < B; ++c) {
    const std::size_t p = positions[static_cast<std::size_t>(c)];
    if (p >= ds.pair_links.size() || !ds.pair_links[p]) {
      throw std::invalid_argument("make_physics_batch: sample at row " +
                                  std::to_string(ds.samples.at(p).index) +
                                  " has no predecessor link");
    }
    b.paired_positions.push_back(*ds.pair_links[p]);
    const Sample& s = ds.samples[p];
    b.T_r(c) = s.T_r();
    b.T_r_next(c) = s.target_T_r_next;
    b.T_a(c) = s.T_a();
  }
  b.targets = ds.target_matrix(positions);
  return b;
}

OutputScaling OutputScaling::from(const Normalizer& n) {
  return {n.target_mean(0), n.target_scale(0), n.target_mean(1), n.target_scale(1)};
}

LossResult composite_loss(const Eigen::MatrixXd& output, const Eigen::RowVectorXd* paired_temp,
                          const PhysicsBatch& batch, const PhysicsParams& pp, double lambda,
                          const OutputScaling& scaling) {
  const Eigen::Index B = output.cols();
  if (B == 0) throw std::invalid_argument("composite_loss: empty batch");
  if (output.rows() < 2) throw std::invalid_argument("composite_loss: output needs >= 2 rows");
  if (batch.targets.cols() != B || batch.T_r.size() != B) {
    throw std::invalid_argument("composite_loss: batch size mismatch");
  }
  if (lambda < 0.0) throw std::invalid_argument("composite_loss: lambda must be >= 0");
  const bool has_latent = output.rows() > 2;
  if (has_latent && (paired_temp == nullptr || paired_temp->size() != B)) {
    throw std::invalid_argument("composite_loss: latent output requires paired predictions");
  }

  const double n = static_cast<double>(B);
  LossResult r;
  r.breakdown.lambda = lambda;
  r.d_output = Eigen::MatrixXd::Zero(output.rows(), B);
  r.d_physics = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(pp.trainable_count()));

  const Eigen::RowVectorXd err_T = output.row(kRowTemp) - batch.targets.row(0);
  const Eigen::RowVectorXd err_u = output.row(kRowPower) - batch.targets.row(1);
  r.breakdown.L_reg = err_T.squaredNorm() / n + err_u.squaredNorm() / n;
  r.d_output.row(kRowTemp) = (2.0 / n) * err_T;
  r.d_output.row(kRowPower) = (2.0 / n) * err_u;

  if (has_latent) {
    const double a11 = pp.a11();
    const double a12 = pp.effective_a12();
    const bool clamped = pp.a12_below_floor();
    const double b = pp.b();
    const double c13 = pp.c13();

    const Eigen::RowVectorXd T_hat =
        (paired_temp->array() * scaling.T_scale + scaling.T_mean).matrix();
    const Eigen::RowVectorXd u_hat =
        (output.row(kRowPower).array() * scaling.u_scale + scaling.u_mean).matrix();
    const Eigen::RowVectorXd z_hat =
        (output.row(kRowLatent).array() * scaling.T_scale + scaling.T_mean).matrix();
    const Eigen::RowVectorXd dT = (batch.T_r_next - batch.T_r) / batch.dt;
    const Eigen::RowVectorXd numerator =
        (dT.array() + a11 * T_hat.array() - b * u_hat.array() - c13 * batch.T_a.array()).matrix();
    const Eigen::RowVectorXd target = numerator / a12;
    const Eigen::RowVectorXd resid = target - z_hat;
    r.breakdown.L_phys = resid.squaredNorm() / n;
    if (clamped) r.clamped = static_cast<int>(B);

    // dL/d(resid) scaled by lambda; resid = target - z_hat.
    const Eigen::RowVectorXd g = (2.0 * lambda / n) * resid;
    r.d_output.row(kRowLatent) = -g * scaling.T_scale;
    r.d_output.row(kRowPower) += g * (-b / a12) * scaling.u_scale;
    r.d_paired_temp = g * (a11 / a12) * scaling.T_scale;

    const std::array<double, PhysicsParams::kCount> d_coeff{
        g.dot(T_hat) / a12,                                     // a11
        clamped ? 0.0 : -g.dot(target) / a12,                   // a12
        0.0,                                                    // a21
        0.0,                                                    // a22
        -g.dot(u_hat) / a12,                                    // b
        -g.dot(batch.T_a) / a12,                                // c13
    };
    Eigen::Index o = 0;
    for (std::size_t i = 0; i < PhysicsParams::kCount; ++i) {
      if (pp.trainable[i]) r.d_physics(o++) = d_coeff[i];
    }
  } else {
    r.d_paired_temp = Eigen::RowVectorXd::Zero(B);
  }
  r.breakdown.total = r.breakdown.L_reg + lambda * r.breakdown.L_phys;
  return r;
}

}  // namespace thermonet
