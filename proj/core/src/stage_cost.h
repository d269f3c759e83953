// Copyright 2026 The lqmftg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LQMFTG_SRC_STAGE_COST_H_
#define LQMFTG_SRC_STAGE_COST_H_

namespace lqmftg::internal {

// c(x, xbar, u1, ubar1, u2, ubar2) =
//   (x - xbar)^T Q (x - xbar) + xbar^T Qtil xbar
//   + (u1 - ubar1)^T R1 (u1 - ubar1) + ubar1^T Rtil1 ubar1
//   - (u2 - ubar2)^T R2 (u2 - ubar2) - ubar2^T Rtil2 ubar2
template <typename StateMat, typename CtrlMat, typename State, typename Ctrl>
double StageCost(const StateMat& Q, const StateMat& Qtil, const CtrlMat& R1,
                 const CtrlMat& Rtil1, const CtrlMat& R2,
                 const CtrlMat& Rtil2, const State& x, const State& xbar,
                 const Ctrl& u1, const Ctrl& ubar1, const Ctrl& u2,
                 const Ctrl& ubar2) {
  const State y = x - xbar;
  const Ctrl v1 = u1 - ubar1;
  const Ctrl v2 = u2 - ubar2;
  return y.dot(Q * y) + xbar.dot(Qtil * xbar) + v1.dot(R1 * v1) +
         ubar1.dot(Rtil1 * ubar1) - v2.dot(R2 * v2) -
         ubar2.dot(Rtil2 * ubar2);
}

}  // namespace lqmftg::internal

#endif  // LQMFTG_SRC_STAGE_COST_H_
