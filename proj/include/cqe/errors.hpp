#pragma once

#include <stdexcept>
#include <string>

namespace cqe {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// relmodel
struct IoError : Error { using Error::Error; };
struct ArityMismatch : Error { using Error::Error; };
struct UnknownRelation : Error { using Error::Error; };
struct BadPositions : Error { using Error::Error; };

// cqparse
struct SyntaxError : Error { using Error::Error; };
struct DuplicateQuantifier : Error { using Error::Error; };
struct QuantifiedVarUnused : Error { using Error::Error; };
struct ScopeError : Error { using Error::Error; };
struct NotSubsetClosed : Error { using Error::Error; };

// decomp
struct InvalidTD : Error { using Error::Error; };
struct TooManyVariables : Error { using Error::Error; };
struct NotAcyclic : Error { using Error::Error; };
struct NotFreeConnex : Error { using Error::Error; };

// consistency
struct BadM : Error { using Error::Error; };

// splitting
struct TrivialRefinement : Error { using Error::Error; };
struct NotNested : Error { using Error::Error; };
struct NotViolating : Error { using Error::Error; };
struct DepthExceeded : Error { using Error::Error; };
struct BadBase : Error { using Error::Error; };
struct EmptyTDList : Error { using Error::Error; };

// enumerate
struct SchemaMismatch : Error { using Error::Error; };
struct DomainMismatch : Error { using Error::Error; };

// oracle
struct TooLarge : Error { using Error::Error; };

// pipeline
struct WidthExceeded : Error {
  WidthExceeded(const std::string& msg, double best_cost, int part_index)
      : Error(msg), best_cost(best_cost), part_index(part_index) {}
  double best_cost;  // best achievable min-max bag cost of the witnessing part
  int part_index;
};

}  // namespace cqe
