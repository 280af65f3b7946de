#pragma once

#include <stdexcept>
#include <string>

namespace mvfund {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// geometry
struct SingularViewMatrix : Error { using Error::Error; };
struct RankDeficiencyError : Error { using Error::Error; };
struct DegenerateCloud : Error { using Error::Error; };
struct DegenerateConfiguration : Error { using Error::Error; };
struct InsufficientViews : Error { using Error::Error; };
struct DegenerateRays : Error { using Error::Error; };

// n-view fundamental matrices
struct IncompleteMatrix : Error { using Error::Error; };
struct SignatureError : Error { using Error::Error; };
struct RoleAmbiguity : Error { using Error::Error; };
struct SkewnessViolation : Error { using Error::Error; };

// solver
struct UncoveredEdge : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };

// viewing graph
struct DisconnectedGraph : Error { using Error::Error; };
struct UncoverableView : Error { using Error::Error; };
struct CoverInfeasible : Error { using Error::Error; };

// reconstruction
struct AlignmentDegenerate : Error { using Error::Error; };
struct UnreachedTriplet : Error { using Error::Error; };

// synthesis
struct InvalidLayout : Error { using Error::Error; };
struct InsufficientMatches : Error { using Error::Error; };

}  // namespace mvfund
