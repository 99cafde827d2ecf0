#pragma once

#include <stdexcept>
#include <string>

namespace sandpile {

// Base class for every error raised by the library. Callers that only care
// about "something went wrong in the model" can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Arithmetic left the representable range (counts, odometers, rationals).
class OverflowError : public Error {
 public:
  using Error::Error;
};

// A bounded iteration (toppling budget, Creutz rounds) ran out.
class BudgetError : public Error {
 public:
  using Error::Error;
};

// Malformed text input: descriptors, polynomials, file formats.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace sandpile
