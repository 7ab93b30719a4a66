#pragma once

#include "posfact/types.hpp"

namespace posfact {

enum class DilationStage { PosProj, ProjProj };

struct Dilation {
  CMatrix ambient;   // the dilated operator, 2n x 2n or 4n x 4n
  CMatrix factor_a;  // ambient = factor_a * factor_b
  CMatrix factor_b;
  Subspace embed;    // image of the original space
  double scale = 1.0;  // T = scale * (corner compression of ambient)
  DilationStage stage = DilationStage::PosProj;
};

/// Dilates a member to an L+·P operator on H ⊕ H: with optimal pair (A, B)
/// rebalanced so ||B|| ≤ 1, the column isometry (B^{1/2}; (1-B)^{1/2}) turns
/// B into a projection and A is padded by zeros.
Dilation dilate_pos_proj(const CMatrix& T, const Tolerances& tol);

/// Second stage: the same construction applied to c·(stage-1 ambient)^H
/// produces a product of two orthogonal projections on H ⊕ H ⊕ H ⊕ H whose
/// corner compression is T / scale.
Dilation dilate_proj_proj(const CMatrix& T, const Tolerances& tol);

}  // namespace posfact
