#ifndef LSAMGDD_ERRORS_HPP
#define LSAMGDD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lsamgdd {

/// Base class of all toolkit errors. `name()` is stable and machine-readable;
/// `what()` carries context.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
  virtual const char* name() const { return "Error"; }
};

class IndexError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "IndexError"; }
};

class DimError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "DimError"; }
};

class InputError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "InputError"; }
};

class FormatError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "FormatError"; }
};

class SplittingError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "SplittingError"; }
};

class EigError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "EigError"; }
};

class SetupError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "SetupError"; }
};

class IndefiniteError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "IndefiniteError"; }
};

class SizeError : public Error {
public:
  using Error::Error;
  const char* name() const override { return "SizeError"; }
};

} // namespace lsamgdd

#endif // LSAMGDD_ERRORS_HPP
