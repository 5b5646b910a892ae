#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pearcey {

/// Argument outside the mathematical domain of an operation (s <= 0, x <= 1, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or corrupted input data (unsorted sequences, duplicate points, empty samples).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid configuration: odd matrix size, insufficient quadrature truncation, bad config file.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative or asymptotic procedure did not stabilise.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double estimate, double spread)
      : std::runtime_error(what), estimate_(estimate), spread_(spread) {}

  double estimate() const noexcept { return estimate_; }
  double spread() const noexcept { return spread_; }

 private:
  double estimate_;
  double spread_;
};

/// A Monte Carlo trial failed; carries what is needed to replay it exactly.
class TrialError : public std::runtime_error {
 public:
  TrialError(const std::string& what, std::size_t trial_index, std::uint64_t trial_seed)
      : std::runtime_error(what), trial_index_(trial_index), trial_seed_(trial_seed) {}

  std::size_t trial_index() const noexcept { return trial_index_; }
  std::uint64_t trial_seed() const noexcept { return trial_seed_; }

 private:
  std::size_t trial_index_;
  std::uint64_t trial_seed_;
};

}  // namespace pearcey
