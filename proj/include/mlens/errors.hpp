#pragma once

#include <stdexcept>
#include <string>

namespace mlens {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoFailure : public Error {
 public:
  using Error::Error;
};

// --- git ---

class GitError : public Error {
 public:
  using Error::Error;
};

class UnresolvableRef : public GitError {
 public:
  using GitError::GitError;
};

class AncestryViolation : public GitError {
 public:
  using GitError::GitError;
};

// --- python parsing ---

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// --- statistics / model ---

class InsufficientClass : public Error {
 public:
  using Error::Error;
};

class MissingClass : public Error {
 public:
  using Error::Error;
};

// --- llm baseline ---

class TransportError : public Error {
 public:
  using Error::Error;
};

class RateLimited : public TransportError {
 public:
  using TransportError::TransportError;
};

class MalformedVerdict : public Error {
 public:
  using Error::Error;
};

}  // namespace mlens
