#ifndef COARSE_IO_HPP
#define COARSE_IO_HPP

#include <string>
#include <variant>

#include "coarse/bernoulli.hpp"
#include "coarse/coarsening.hpp"
#include "coarse/distribution.hpp"
#include "coarse/hypergraph.hpp"
#include "coarse/procedural.hpp"

namespace coarse {

using AnyModel = std::variant<CoarseDistribution, SupportHypergraph, CoarseningVariable, MgdModel,
                              RmcModel, UniformNoiseModel, PtModel, TabularSequentialModel,
                              BernoulliModel>;

struct ParsedModel {
  std::string kind;
  AnyModel model;
};

/// Parses one JSON model document. Rationals are "p/q" strings, subsets are
/// lists of state labels. Throws ParseError for syntax problems and
/// ValidationError (with field context) for semantic ones.
ParsedModel parse_model_text(const std::string& text, const std::string& origin = "<input>");
ParsedModel parse_model_file(const std::string& path);

/// Serializers for the documents the CLI emits.
std::string distribution_to_json(const CoarseDistribution& p);
std::string bernoulli_to_json(const BernoulliModel& b);

/// The exact induced distribution of any model kind that has one; throws
/// ValidationError for hypergraphs (use realize) and distributions pass
/// through unchanged.
CoarseDistribution induced_of(const ParsedModel& parsed);

}  // namespace coarse

#endif
