// Copyright 2026 The V2S Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "v2s/fem.hpp"

#include <Eigen/LU>
#include <Eigen/Sparse>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace v2s {

LamePair lame_from_elastic(double E, double nu) {
  if (!(E > 0.0)) throw Error(ErrorCode::kDomain, "Young's modulus must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw Error(ErrorCode::kDomain, "Poisson's ratio must lie in [0, 0.5)");
  return {E / (2.0 * (1.0 + nu)), E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))};
}

MaterialParams MaterialParams::from_elastic(double E, double nu) {
  const LamePair l = lame_from_elastic(E, nu);
  return {E, nu, l.mu, l.lambda};
}

double strain_energy_density(const Mat3& F, const MaterialParams& m) {
  const double J = F.determinant();
  if (!(J > 0.0)) throw Error(ErrorCode::kInvertedElement, "deformation gradient has det(F) <= 0");
  const double lnJ = std::log(J);
  return 0.5 * m.mu * (F.squaredNorm() - 3.0) - m.mu * lnJ + 0.5 * m.lambda * lnJ * lnJ;
}

Mat3 first_piola_kirchhoff(const Mat3& F, const MaterialParams& m) {
  const double J = F.determinant();
  if (!(J > 0.0)) throw Error(ErrorCode::kInvertedElement, "deformation gradient has det(F) <= 0");
  const Mat3 FinvT = F.inverse().transpose();
  return m.mu * (F - FinvT) + m.lambda * std::log(J) * FinvT;
}

std::vector<Vec3> nodal_loads(const TetMesh& mesh, const Scenario& scenario) {
  std::vector<Vec3> f(mesh.vertex_count(), Vec3::Zero());
  const auto& V = mesh.vertices();
  std::vector<char> in_patch(mesh.vertex_count(), 0);
  std::vector<double> weight(mesh.vertex_count(), 0.0);
  for (const LoadPatch& patch : scenario.loads) {
    if (patch.vertices.empty() && patch.force != Vec3::Zero())
      throw Error(ErrorCode::kInvalidArgument, "load patch has a force but no vertices");
    for (int v : patch.vertices) {
      if (v < 0 || v >= static_cast<int>(mesh.vertex_count()))
        throw Error(ErrorCode::kInvalidArgument, "load patch vertex out of range");
      in_patch[v] = 1;
    }
    for (const Tri& t : mesh.boundary_faces()) {
      if (!(in_patch[t[0]] && in_patch[t[1]] && in_patch[t[2]])) continue;
      const double a = triangle_area_vector(V[t[0]], V[t[1]], V[t[2]]).norm() / 3.0;
      for (int v : t) weight[v] += a;
    }
    double total = 0.0;
    for (int v : patch.vertices) total += weight[v];
    for (int v : patch.vertices) {
      const double share = total > 0.0 ? weight[v] / total : 1.0 / static_cast<double>(patch.vertices.size());
      f[v] += share * patch.force;
    }
    for (int v : patch.vertices) {
      in_patch[v] = 0;
      weight[v] = 0.0;
    }
  }
  return f;
}

ElasticModel::ElasticModel(const TetMesh& mesh, const MaterialParams& material)
    : mesh_(&mesh), material_(material) {
  const auto& V = mesh.vertices();
  grads_.resize(mesh.tet_count());
  volumes_.resize(mesh.tet_count());
  for (size_t e = 0; e < mesh.tet_count(); ++e) {
    const Tet& t = mesh.tets()[e];
    Mat3 Dm;
    Dm.col(0) = V[t[1]] - V[t[0]];
    Dm.col(1) = V[t[2]] - V[t[0]];
    Dm.col(2) = V[t[3]] - V[t[0]];
    const double det = Dm.determinant();
    if (!(det > 0.0)) throw Error(ErrorCode::kInvertedElement, "rest element " + std::to_string(e) + " is inverted");
    volumes_[e] = det / 6.0;
    const Mat3 G = Dm.inverse();  // row i = gradient of shape function i+1
    grads_[e][1] = G.row(0).transpose();
    grads_[e][2] = G.row(1).transpose();
    grads_[e][3] = G.row(2).transpose();
    grads_[e][0] = -(grads_[e][1] + grads_[e][2] + grads_[e][3]);
  }
}

Mat3 ElasticModel::deformation_gradient(size_t e, std::span<const Vec3> u) const {
  const Tet& t = mesh_->tets()[e];
  Mat3 F = Mat3::Identity();
  for (int a = 0; a < 4; ++a) F += u[t[a]] * grads_[e][a].transpose();
  return F;
}

double ElasticModel::energy(std::span<const Vec3> u) const {
  double total = 0.0;
  const double mu = material_.mu, lambda = material_.lambda;
  for (size_t e = 0; e < volumes_.size(); ++e) {
    const Mat3 F = deformation_gradient(e, u);
    const double J = F.determinant();
    if (!(J > 0.0)) return std::numeric_limits<double>::infinity();
    const double lnJ = std::log(J);
    total += volumes_[e] * (0.5 * mu * (F.squaredNorm() - 3.0) - mu * lnJ + 0.5 * lambda * lnJ * lnJ);
  }
  return total;
}

bool ElasticModel::internal_forces(std::span<const Vec3> u, std::vector<Vec3>& forces) const {
  forces.assign(mesh_->vertex_count(), Vec3::Zero());
  for (size_t e = 0; e < volumes_.size(); ++e) {
    const Mat3 F = deformation_gradient(e, u);
    const double J = F.determinant();
    if (!(J > 0.0)) return false;
    const Mat3 FinvT = F.inverse().transpose();
    const Mat3 P = material_.mu * (F - FinvT) + material_.lambda * std::log(J) * FinvT;
    const Tet& t = mesh_->tets()[e];
    for (int a = 0; a < 4; ++a) forces[t[a]] += volumes_[e] * (P * grads_[e][a]);
  }
  return true;
}

bool ElasticModel::element_stiffness(std::span<const Vec3> u, std::vector<double>& blocks) const {
  blocks.assign(volumes_.size() * 144, 0.0);
  const double mu = material_.mu, lambda = material_.lambda;
  for (size_t e = 0; e < volumes_.size(); ++e) {
    const Mat3 F = deformation_gradient(e, u);
    const double J = F.determinant();
    if (!(J > 0.0)) return false;
    const Mat3 Finv = F.inverse();
    const Mat3 FinvT = Finv.transpose();
    const double c = mu - lambda * std::log(J);
    double* K = &blocks[e * 144];
    for (int a = 0; a < 4; ++a) {
      for (int k = 0; k < 3; ++k) {
        // dF = e_k (x) grad_a
        Mat3 dF = Mat3::Zero();
        dF.row(k) = grads_[e][a].transpose();
        const Mat3 dP = mu * dF + c * (FinvT * dF.transpose() * FinvT) + lambda * (Finv * dF).trace() * FinvT;
        const int col = 3 * a + k;
        for (int b = 0; b < 4; ++b) {
          const Vec3 fb = volumes_[e] * (dP * grads_[e][b]);
          for (int l = 0; l < 3; ++l) K[(3 * b + l) * 12 + col] = fb[l];
        }
      }
    }
  }
  return true;
}

double total_strain_energy(const TetMesh& mesh, std::span<const Vec3> u, const MaterialParams& m) {
  if (u.size() != mesh.vertex_count()) throw Error(ErrorCode::kInvalidArgument, "displacement size mismatch");
  const double e = ElasticModel(mesh, m).energy(u);
  if (std::isinf(e)) throw Error(ErrorCode::kInvertedElement, "displacement inverts an element");
  return e;
}

std::vector<Vec3> internal_forces(const TetMesh& mesh, std::span<const Vec3> u, const MaterialParams& m) {
  if (u.size() != mesh.vertex_count()) throw Error(ErrorCode::kInvalidArgument, "displacement size mismatch");
  std::vector<Vec3> f;
  if (!ElasticModel(mesh, m).internal_forces(u, f))
    throw Error(ErrorCode::kInvertedElement, "displacement inverts an element");
  return f;
}

namespace {

std::vector<char> constrained_dofs(const TetMesh& mesh, const Scenario& s) {
  std::vector<char> fixed(3 * mesh.vertex_count(), 0);
  for (int v : s.fixed_vertices) {
    if (v < 0 || v >= static_cast<int>(mesh.vertex_count()))
      throw Error(ErrorCode::kInvalidArgument, "fixed vertex out of range");
    fixed[3 * v] = fixed[3 * v + 1] = fixed[3 * v + 2] = 1;
  }
  for (const AxisConstraint& c : s.sliding) {
    if (c.vertex < 0 || c.vertex >= static_cast<int>(mesh.vertex_count()) || c.axis < 0 || c.axis > 2)
      throw Error(ErrorCode::kInvalidArgument, "axis constraint out of range");
    fixed[3 * c.vertex + c.axis] = 1;
  }
  return fixed;
}

}  // namespace

std::vector<Vec3> assemble_residual(const TetMesh& mesh, std::span<const Vec3> u, const Scenario& scenario) {
  std::vector<Vec3> r = internal_forces(mesh, u, scenario.material);
  const std::vector<Vec3> f = nodal_loads(mesh, scenario);
  const std::vector<char> fixed = constrained_dofs(mesh, scenario);
  for (size_t v = 0; v < r.size(); ++v) {
    r[v] -= f[v];
    for (int k = 0; k < 3; ++k)
      if (fixed[3 * v + k]) r[v][k] = 0.0;
  }
  return r;
}

namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;
using VectorX = Eigen::VectorXd;
using SparseSolver = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>;

class NewtonSolver {
 public:
  NewtonSolver(const TetMesh& mesh, const Scenario& scenario, const SolverOpts& opts)
      : mesh_(mesh), model_(mesh, scenario.material), opts_(opts) {
    const std::vector<char> fixed = constrained_dofs(mesh, scenario);
    dof_map_.assign(fixed.size(), -1);
    for (size_t d = 0; d < fixed.size(); ++d)
      if (!fixed[d]) dof_map_[d] = free_count_++;
    loads_ = nodal_loads(mesh, scenario);
    solver_.setTolerance(1e-10);
  }

  int free_count() const { return free_count_; }

  // Residual restricted to free dofs at load factor s; false if inverted.
  bool residual(const DisplacementField& u, double s, VectorX& r) const {
    std::vector<Vec3> f;
    if (!model_.internal_forces(u, f)) return false;
    r.resize(free_count_);
    for (size_t v = 0; v < f.size(); ++v)
      for (int k = 0; k < 3; ++k) {
        const int d = dof_map_[3 * v + k];
        if (d >= 0) r[d] = f[v][k] - s * loads_[v][k];
      }
    return true;
  }

  double potential(const DisplacementField& u, double s) const {
    double p = model_.energy(u);
    if (std::isinf(p)) return p;
    for (size_t v = 0; v < u.size(); ++v) p -= s * loads_[v].dot(u[v]);
    return p;
  }

  bool stiffness(const DisplacementField& u, SparseMatrix& K) {
    std::vector<double> blocks;
    if (!model_.element_stiffness(u, blocks)) return false;
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(blocks.size());
    const auto& tets = mesh_.tets();
    for (size_t e = 0; e < tets.size(); ++e) {
      const double* Ke = &blocks[e * 144];
      for (int i = 0; i < 12; ++i) {
        const int di = dof_map_[3 * tets[e][i / 3] + i % 3];
        if (di < 0) continue;
        for (int j = 0; j < 12; ++j) {
          const int dj = dof_map_[3 * tets[e][j / 3] + j % 3];
          if (dj < 0) continue;
          trip.emplace_back(di, dj, Ke[i * 12 + j]);
        }
      }
    }
    K.resize(free_count_, free_count_);
    K.setFromTriplets(trip.begin(), trip.end());
    return true;
  }

  void apply(DisplacementField& u, const VectorX& step, double alpha) const {
    for (size_t v = 0; v < u.size(); ++v)
      for (int k = 0; k < 3; ++k) {
        const int d = dof_map_[3 * v + k];
        if (d >= 0) u[v][k] += alpha * step[d];
      }
  }

  // Newton iterations at load factor s starting from u. Returns true on
  // convergence; u is updated in place either way.
  bool solve_increment(DisplacementField& u, double s, SolveReport& report) {
    VectorX r;
    if (!residual(u, s, r)) return false;
    SparseMatrix K;
    for (int it = 0; it <= opts_.max_newton_steps; ++it) {
      const double rmax = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
      report.residual_max_norm = rmax;
      if (rmax <= opts_.tolerance) return true;
      if (it == opts_.max_newton_steps) break;
      ++report.newton_iterations;
      if (!stiffness(u, K)) return false;
      VectorX step;
      if (!descent_direction(K, r, step)) return false;

      const double p0 = potential(u, s);
      const double slope = r.dot(step);
      const double rnorm = r.norm();
      double alpha = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
        DisplacementField trial = u;
        apply(trial, step, alpha);
        const double p1 = potential(trial, s);
        if (std::isinf(p1)) continue;
        VectorX r1;
        if (!residual(trial, s, r1)) continue;
        // Energy decrease, or residual decrease once the energy change is
        // below rounding.
        if (p1 <= p0 + 1e-4 * alpha * slope || r1.norm() < (1.0 - 1e-4 * alpha) * rnorm) {
          u = std::move(trial);
          r = std::move(r1);
          accepted = true;
          break;
        }
      }
      if (!accepted) return false;
    }
    return false;
  }

 private:
  bool descent_direction(const SparseMatrix& K, const VectorX& r, VectorX& step) {
    double shift = 0.0;
    SparseMatrix identity(K.rows(), K.cols());
    identity.setIdentity();
    const double scale = K.diagonal().cwiseAbs().mean();
    SparseMatrix shifted;
    for (int attempt = 0; attempt < 8; ++attempt) {
      const SparseMatrix* A = &K;
      if (shift > 0.0) {
        shifted = K + (shift * scale) * identity;
        A = &shifted;
      }
      solver_.compute(*A);
      if (solver_.info() == Eigen::Success) {
        step = -solver_.solve(r);
        if (solver_.info() == Eigen::Success && step.allFinite() && r.dot(step) < 0.0) return true;
      }
      // Indefinite tangent: regularize toward gradient descent.
      shift = shift == 0.0 ? 1e-4 : shift * 10.0;
    }
    return false;
  }

  const TetMesh& mesh_;
  ElasticModel model_;
  SolverOpts opts_;
  std::vector<int> dof_map_;
  int free_count_ = 0;
  std::vector<Vec3> loads_;
  SparseSolver solver_;
};

}  // namespace

DisplacementField solve_static(const TetMesh& mesh, const Scenario& scenario, const SolverOpts& opts,
                               SolveReport* report) {
  if (opts.load_steps < 1 || opts.max_newton_steps < 1 || !(opts.tolerance > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "invalid solver options");
  NewtonSolver solver(mesh, scenario, opts);
  SolveReport local;
  DisplacementField u(mesh.vertex_count(), Vec3::Zero());

  double reached = 0.0;
  double increment = 1.0 / opts.load_steps;
  int halvings = 0;
  while (reached < 1.0) {
    const double next = std::min(1.0, reached + increment);
    DisplacementField trial = u;
    if (solver.solve_increment(trial, next, local)) {
      u = std::move(trial);
      reached = next;
      ++local.load_increments;
      continue;
    }
    if (++halvings > opts.max_step_halvings) {
      std::ostringstream os;
      os << "Newton solver did not converge (load factor " << reached << ", residual "
         << local.residual_max_norm << " N)";
      throw Error(ErrorCode::kNonConvergence, os.str());
    }
    increment *= 0.5;
  }
  if (report) *report = local;
  return u;
}

}  // namespace v2s
