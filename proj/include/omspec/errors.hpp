#ifndef OMSPEC_ERRORS_HPP
#define OMSPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace omspec {

/// Base class for all omspec errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument violates a precondition.
class InvalidInputError : public Error {
 public:
  using Error::Error;
};

/// The linear system is rank deficient or its condition number exceeds the cap.
class IllPosedError : public Error {
 public:
  IllPosedError(const std::string& what, double condition_number)
      : Error(what), condition_number_(condition_number) {}
  double condition_number() const { return condition_number_; }

 private:
  double condition_number_;
};

/// The requested continuum discretization exceeds the configured size cap.
class OracleResourceError : public Error {
 public:
  using Error::Error;
};

/// The time integrator lost more norm than its tolerance allows.
class IntegratorFailureError : public Error {
 public:
  using Error::Error;
};

/// A quantity that must vanish by construction came out too large.
class InternalConsistencyError : public Error {
 public:
  using Error::Error;
};

/// File or stream level failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace omspec

#endif
