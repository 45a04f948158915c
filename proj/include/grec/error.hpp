#pragma once

#include <stdexcept>
#include <string>

namespace grec {

struct ConfigInfeasible : std::runtime_error {
  explicit ConfigInfeasible(const std::string& m) : std::runtime_error(m) {}
};

struct TargetOccluded : std::runtime_error {
  explicit TargetOccluded(const std::string& m) : std::runtime_error(m) {}
};

struct EmptyCandidates : std::runtime_error {
  explicit EmptyCandidates(const std::string& m) : std::runtime_error(m) {}
};

struct MalformedExpr : std::runtime_error {
  explicit MalformedExpr(const std::string& m) : std::runtime_error(m) {}
};

struct NoExpressible : std::runtime_error {
  explicit NoExpressible(const std::string& m) : std::runtime_error(m) {}
};

struct TargetInvisible : std::runtime_error {
  explicit TargetInvisible(const std::string& m) : std::runtime_error(m) {}
};

struct DegenerateCrop : std::runtime_error {
  explicit DegenerateCrop(const std::string& m) : std::runtime_error(m) {}
};

struct BackendUnavailable : std::runtime_error {
  explicit BackendUnavailable(const std::string& m) : std::runtime_error(m) {}
};

struct MisalignedTargets : std::runtime_error {
  explicit MisalignedTargets(const std::string& m) : std::runtime_error(m) {}
};

struct MissingPrediction : std::runtime_error {
  explicit MissingPrediction(const std::string& m) : std::runtime_error(m) {}
};

struct DuplicatePrediction : std::runtime_error {
  explicit DuplicatePrediction(const std::string& m) : std::runtime_error(m) {}
};

struct DuplicateSampleId : std::runtime_error {
  explicit DuplicateSampleId(const std::string& m) : std::runtime_error(m) {}
};

struct QuotaUnsatisfiable : std::runtime_error {
  explicit QuotaUnsatisfiable(const std::string& m) : std::runtime_error(m) {}
};

struct SchemaMismatch : std::runtime_error {
  explicit SchemaMismatch(const std::string& m) : std::runtime_error(m) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace grec
