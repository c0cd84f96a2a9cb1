#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mkvldp {

/// Invalid argument or a precondition that the caller can check up front.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The operation exists only for part of the parameter range (e.g. H > 1/2).
class UnsupportedBranch : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Random path generation failed (embedding not nonnegative and no fallback).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time step too coarse for the fast time scale.
class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A simulated state became non-finite.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(std::string where, std::size_t step, std::size_t particle, std::size_t component)
      : std::runtime_error(where + ": non-finite state at step " + std::to_string(step) +
                           ", particle " + std::to_string(particle) + ", component " +
                           std::to_string(component)),
        step_(step),
        particle_(particle),
        component_(component) {}

  std::size_t step() const noexcept { return step_; }
  std::size_t particle() const noexcept { return particle_; }
  std::size_t component() const noexcept { return component_; }

 private:
  std::size_t step_;
  std::size_t particle_;
  std::size_t component_;
};

}  // namespace mkvldp
