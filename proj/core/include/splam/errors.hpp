#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace splam {

//! Base class for all recoverable domain errors thrown by this library.
//! The CLI maps these to exit code 2; anything else is a usage bug.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidBandwidthError : public Error {
public:
  using Error::Error;
};

//! A kernel window whose weight mass fell below the denominator guard,
//! or which contains fewer observations than the smoother needs.
class DegenerateWindowError : public Error {
public:
  DegenerateWindowError(const std::string& what, std::vector<long> rows)
    : Error(what), rows_(std::move(rows)) {}
  const std::vector<long>& rows() const { return rows_; }

private:
  std::vector<long> rows_;
};

//! Estimated marginal design density vanished on part of the grid.
class SparseRegionError : public Error {
public:
  SparseRegionError(const std::string& what, int coordinate, int grid_index)
    : Error(what), coordinate_(coordinate), grid_index_(grid_index) {}
  int coordinate() const { return coordinate_; }
  int grid_index() const { return grid_index_; }

private:
  int coordinate_;
  int grid_index_;
};

class SingularSystemError : public Error {
public:
  using Error::Error;
};

//! X is (near-)exactly explained by additive functions of Z, so the
//! residualized Gram matrix is numerically rank deficient.
class ConcurvityError : public Error {
public:
  ConcurvityError(const std::string& what, double smallest_eigenvalue)
    : Error(what), smallest_eigenvalue_(smallest_eigenvalue) {}
  double smallest_eigenvalue() const { return smallest_eigenvalue_; }

private:
  double smallest_eigenvalue_;
};

class NonConvergenceError : public Error {
public:
  NonConvergenceError(const std::string& what, double final_delta)
    : Error(what), final_delta_(final_delta) {}
  double final_delta() const { return final_delta_; }

private:
  double final_delta_;
};

class NonInvertibleInformationError : public Error {
public:
  using Error::Error;
};

class NotImplementedError : public Error {
public:
  using Error::Error;
};

//! CSV ingestion problems; carries a human readable row/column description.
class IngestError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

}  // namespace splam
