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

#pragma once

#include <span>
#include <vector>

#include "v2s/tet_mesh.hpp"

namespace v2s {

struct LamePair {
  double mu = 0.0;
  double lambda = 0.0;
};

// Throws kDomain unless E > 0 and 0 <= nu < 0.5.
LamePair lame_from_elastic(double youngs_modulus, double poissons_ratio);

struct MaterialParams {
  double youngs_modulus = 3000.0;  // Pa
  double poissons_ratio = 0.35;
  double mu = 0.0;                 // Pa, derived
  double lambda = 0.0;             // Pa, derived

  static MaterialParams from_elastic(double youngs_modulus, double poissons_ratio);
};

// Compressible neo-Hookean energy density
//   W = mu/2 (tr(F^T F) - 3) - mu ln J + lambda/2 (ln J)^2.
// Throws kInvertedElement when det(F) <= 0.
double strain_energy_density(const Mat3& F, const MaterialParams& m);
// First Piola-Kirchhoff stress dW/dF.
Mat3 first_piola_kirchhoff(const Mat3& F, const MaterialParams& m);

struct LoadPatch {
  std::vector<int> vertices;
  Vec3 force = Vec3::Zero();  // total force on the patch, N
};

// Single-component Dirichlet constraint (roller).
struct AxisConstraint {
  int vertex = 0;
  int axis = 0;
};

struct Scenario {
  std::vector<int> fixed_vertices;  // zero displacement in all components
  std::vector<LoadPatch> loads;
  MaterialParams material;
  std::vector<AxisConstraint> sliding;
};

using DisplacementField = std::vector<Vec3>;

struct SolverOpts {
  double tolerance = 1e-6;  // max-norm of the residual, N
  int max_newton_steps = 30;
  int load_steps = 5;
  int max_step_halvings = 6;
};

struct SolveReport {
  int newton_iterations = 0;
  int load_increments = 0;
  double residual_max_norm = 0.0;
};

// Per-vertex external forces: each patch's total force is split over its
// vertices in proportion to the boundary area associated with them (a third
// of every boundary triangle lying inside the patch).
std::vector<Vec3> nodal_loads(const TetMesh& mesh, const Scenario& scenario);

// Precomputed P1 element data for one mesh and material.
class ElasticModel {
 public:
  ElasticModel(const TetMesh& mesh, const MaterialParams& material);

  // Total strain energy; +inf if any element is inverted.
  double energy(std::span<const Vec3> u) const;
  // Gradient of energy() w.r.t. vertex positions. Returns false if any
  // element is inverted.
  bool internal_forces(std::span<const Vec3> u, std::vector<Vec3>& forces) const;
  // Per-element 12x12 tangent blocks, row-major, dof order (vertex, axis).
  bool element_stiffness(std::span<const Vec3> u, std::vector<double>& blocks) const;

  const TetMesh& mesh() const { return *mesh_; }
  const MaterialParams& material() const { return material_; }

 private:
  Mat3 deformation_gradient(size_t e, std::span<const Vec3> u) const;

  const TetMesh* mesh_;
  MaterialParams material_;
  std::vector<std::array<Vec3, 4>> grads_;  // shape-function gradients
  std::vector<double> volumes_;
};

double total_strain_energy(const TetMesh& mesh, std::span<const Vec3> u, const MaterialParams& m);
// Throws kInvertedElement.
std::vector<Vec3> internal_forces(const TetMesh& mesh, std::span<const Vec3> u, const MaterialParams& m);

// Internal minus external nodal forces with constrained components zeroed.
// Throws kInvertedElement.
std::vector<Vec3> assemble_residual(const TetMesh& mesh, std::span<const Vec3> u, const Scenario& scenario);

// Static equilibrium by Newton's method with backtracking line search on the
// total potential energy and incremental loading with adaptive halving.
// Throws kNonConvergence.
DisplacementField solve_static(const TetMesh& mesh, const Scenario& scenario, const SolverOpts& opts = {},
                               SolveReport* report = nullptr);

}  // namespace v2s
