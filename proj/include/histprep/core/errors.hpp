#pragma once

#include <stdexcept>
#include <string>

namespace histprep {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Input violates a documented precondition or invariant.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

/// Malformed external input (files, config).
class ParseError : public Error {
public:
  explicit ParseError(const std::string& what) : Error(what) {}
};

/// Too few samples to carry out the requested computation.
class NotEnoughData : public Error {
public:
  explicit NotEnoughData(const std::string& what) : Error(what) {}
};

/// No co-present value pairs at all (everything missing).
class AllAbsent : public NotEnoughData {
public:
  explicit AllAbsent(const std::string& what) : NotEnoughData(what) {}
};

/// Synthetic data generation failed (bad parameters, divergence).
class GenerationError : public Error {
public:
  explicit GenerationError(const std::string& what) : Error(what) {}
};

} // namespace histprep
