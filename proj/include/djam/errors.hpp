#pragma once

#include <stdexcept>
#include <string>

namespace djam {

/// Base class for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// network
class IndexOutOfRange : public Error { public: using Error::Error; };
class SelfLoop : public Error { public: using Error::Error; };
class DuplicateEdge : public Error { public: using Error::Error; };
class NonpositiveWeight : public Error { public: using Error::Error; };
class DisconnectedGraph : public Error { public: using Error::Error; };
class ParseError : public Error { public: using Error::Error; };

// losses / solvers
class DimensionMismatch : public Error { public: using Error::Error; };
class NonFiniteInput : public Error { public: using Error::Error; };
class SolverDidNotConverge : public Error { public: using Error::Error; };
class MissingNeighborModel : public Error { public: using Error::Error; };

// gossip engine
class UnknownEdge : public Error { public: using Error::Error; };
class InvalidSchedule : public Error { public: using Error::Error; };

// oracle
class NotQuadratic : public Error { public: using Error::Error; };
class LinearSolveFailure : public Error { public: using Error::Error; };
class MaxSweepsExceeded : public Error { public: using Error::Error; };

// admm
class NonpositiveRho : public Error { public: using Error::Error; };

// experiment
class InvalidTopology : public Error { public: using Error::Error; };
class FactorizationFailure : public Error { public: using Error::Error; };
class ZeroNormSolutionComponent : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

}  // namespace djam
