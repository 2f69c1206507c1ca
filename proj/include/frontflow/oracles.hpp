#pragma once

namespace frontflow {

/// A_theta by shooting: U'' = 2 theta U^{2theta-1} from U(0) = m, U'(0) = 0,
/// bisecting on m until the solution blows up at x = 1; A = m^{2 theta}.
/// Independent of the quadrature route in compute_A.
double shooting_A(int theta);

/// B_theta by shooting from U(0) = 0, U'(0) = sqrt(2 B).
double shooting_B(int theta);

}  // namespace frontflow
