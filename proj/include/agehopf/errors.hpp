#pragma once

#include <stdexcept>
#include <string>

namespace agehopf {

/// Base class for failures of the numerical machinery (as opposed to
/// domain violations, which throw std::domain_error, and input
/// validation, which throws std::invalid_argument).
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// An iteration (Newton, fixed point, continuation corrector) ran out of
/// steps without meeting its tolerance.
class NoConvergence : public NumericError {
  public:
    using NumericError::NumericError;
};

/// A bracketing solve has no root in the admissible range
/// (e.g. normalizing by mortality when the reproduction number is < 1).
class NoSolution : public NumericError {
  public:
    using NumericError::NumericError;
};

/// The equilibrium branch hits 1 - f_w = 0, where the implicit function
/// theorem fails.
class FoldPoint : public NumericError {
  public:
    using NumericError::NumericError;
};

/// The renewal stepper's implicit lag-0 sweep is not a contraction at the
/// requested step size, or the step size is incompatible with the kernel.
class StepSizeError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// The blown-up bifurcation system has a singular Jacobian, i.e. the
/// 2x2 solvability determinant of the critical mode vanishes.
class DegenerateBifurcation : public NumericError {
  public:
    using NumericError::NumericError;
};

}  // namespace agehopf
