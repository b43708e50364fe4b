// SPDX-License-Identifier: MIT
// Copyright (c) 2026 The qwl authors

#pragma once

#include <stdexcept>
#include <string>

namespace qwl {

/// Base of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual const char* kind() const noexcept { return "Error"; }
};

#define QWL_DEFINE_ERROR(Name)                                        \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what) : Error(what) {}           \
    const char* kind() const noexcept override { return #Name; }      \
  };

// numerics
QWL_DEFINE_ERROR(NonHermitianInput)
QWL_DEFINE_ERROR(DomainError)
QWL_DEFINE_ERROR(NonConvergence)
QWL_DEFINE_ERROR(InvalidTolerance)

// superop
QWL_DEFINE_ERROR(DimensionMismatch)
QWL_DEFINE_ERROR(NotCompletelyPositive)
QWL_DEFINE_ERROR(RangeEscapesSpan)

// condform
QWL_DEFINE_ERROR(NonHermitianMap)
QWL_DEFINE_ERROR(NotConditionallyNegative)
QWL_DEFINE_ERROR(UnitLowerBoundViolated)

// bweight
QWL_DEFINE_ERROR(InadmissiblePair)
QWL_DEFINE_ERROR(InvalidWeightFamily)

// choieffros
QWL_DEFINE_ERROR(NotIdempotent)
QWL_DEFINE_ERROR(OperandOutsideRange)
QWL_DEFINE_ERROR(NumericallyDegenerateCenter)
QWL_DEFINE_ERROR(NotPositive)
QWL_DEFINE_ERROR(HypothesisViolated)

// qweight
QWL_DEFINE_ERROR(SpecInvalid)
QWL_DEFINE_ERROR(PsiNotInvertible)
QWL_DEFINE_ERROR(PsiInverseNotCP)
QWL_DEFINE_ERROR(ConditionalNegativityFailure)
QWL_DEFINE_ERROR(UnitInequalityFailure)
QWL_DEFINE_ERROR(SingularResolvent)
QWL_DEFINE_ERROR(DivergentValue)
QWL_DEFINE_ERROR(EtaNotDominated)
QWL_DEFINE_ERROR(PsiPrimeConditionFailure)
QWL_DEFINE_ERROR(NotQPure)
QWL_DEFINE_ERROR(NotUnital)
QWL_DEFINE_ERROR(WitnessMalformed)
QWL_DEFINE_ERROR(PreconditionError)

// io
QWL_DEFINE_ERROR(ParseError)

#undef QWL_DEFINE_ERROR

}  // namespace qwl
