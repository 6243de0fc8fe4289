#pragma once
// All structured error types thrown by the library. Each carries a short
// machine-readable code() so the CLI can map failures to exit codes and JSON.

#include <stdexcept>
#include <string>

namespace ggsplit {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
  virtual std::string code() const { return "Error"; }
};

#define GGSPLIT_ERROR(NAME)                                              \
  struct NAME : Error {                                                  \
    explicit NAME(const std::string& what) : Error(#NAME ": " + what) {} \
    std::string code() const override { return #NAME; }                  \
  };

GGSPLIT_ERROR(UnknownGenerator)        // token names no generator
GGSPLIT_ERROR(InvalidInput)            // malformed problem description
GGSPLIT_ERROR(NotInner)                // conjugacy system has no solution
GGSPLIT_ERROR(CentreNotTrivial)        // conjugator not unique (degenerate ambient)
GGSPLIT_ERROR(NotPreserved)            // action does not permute factor conjugacy classes
GGSPLIT_ERROR(NotAnAutomorphism)       // images fail to define/generate
GGSPLIT_ERROR(BudgetExceeded)          // ball/size budget exhausted
GGSPLIT_ERROR(HorizonExhausted)        // no certified cut found within max radius
GGSPLIT_ERROR(NestingUndecidable)      // crossing count not certifiable at this radius
GGSPLIT_ERROR(StabiliserBudgetExceeded)// stabiliser search exhausted its budget
GGSPLIT_ERROR(PostconditionFailed)     // an algebraic verification gate failed
GGSPLIT_ERROR(EnumerationBudgetExceeded) // coset enumeration ran out of budget
GGSPLIT_ERROR(IncompatibleActions)     // blow-up inputs disagree on shared data
GGSPLIT_ERROR(NoFixedPoint)            // finite action on a graph fixes nothing
GGSPLIT_ERROR(ExtensionMismatch)       // marked graph does not realise the extension
GGSPLIT_ERROR(UndefinedChi)            // Euler characteristic undefined for a label
GGSPLIT_ERROR(Unsupported)             // valid input outside implemented scope

#undef GGSPLIT_ERROR

}  // namespace ggsplit
