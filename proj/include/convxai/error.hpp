#pragma once

#include <stdexcept>
#include <string>

namespace convxai {

// Base class for every error raised by the library. Callers that only care
// about "something in convxai failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or semantically invalid input (corpus lines, requests, variables).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Input that is well-formed but cannot support the requested computation,
// e.g. too few sentences to build percentile boundaries.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

// Artifact files that are missing, unreadable, or of the wrong version.
class ArtifactError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

// A request named a session token the service does not know.
class Unauthorized : public Error {
 public:
  using Error::Error;
};

}  // namespace convxai
