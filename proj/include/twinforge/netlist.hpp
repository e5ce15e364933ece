#pragma once

#include <cstddef>
#include <string>

#include "twinforge/model.hpp"

namespace twinforge {

inline constexpr const char* kNetlistSchemaId = "twinforge-netlist/1";

// Which textual representation a piece of IR text is in.
enum class IrKind { Dsl, Netlist };

const char* ir_kind_name(IrKind k);

// Parse a JSON netlist document into a graph.
//
// Rejected here: text that is not JSON (ParseError); entries whose shape is
// wrong, i.e. unknown kind names, missing id/from/to, endpoints naming no
// node entry, bad param value types, wrong schema id (SchemaError).
// Deliberately NOT rejected here: duplicate node/edge ids and edge ids bound
// to several endpoint pairs. Foreign netlists carry exactly those defects,
// and the validator reports them as findings rather than losing the graph.
ModelGraph read_netlist(const std::string& text);

// Serialize in canonical form. read_netlist(write_netlist(g)) equals
// canonical_form(g). The hierarchy section is emitted only when non-trivial.
std::string write_netlist(const ModelGraph& graph);

struct DensityReport {
  IrKind ir_kind = IrKind::Netlist;
  std::size_t entry_count = 0;  // DSL statements or netlist node+edge entries
  std::size_t char_count = 0;
  std::size_t flat_node_count = 0;
  std::size_t flat_edge_count = 0;
  // (flat nodes + flat edges) / entry_count; the compression a loop buys.
  double expansion_ratio = 0.0;
};

// Measure how much flat structure one authored entry expands to. `graph`
// must be the elaboration of `ir_text`.
DensityReport density(const std::string& ir_text, IrKind kind, const ModelGraph& graph);

} // namespace twinforge
