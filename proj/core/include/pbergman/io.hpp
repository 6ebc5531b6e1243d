#pragma once

// Text formats: cell specifications and solved-map archives (JSON).

#include <map>
#include <string>

#include "pbergman/cellgeom.hpp"
#include "pbergman/confmap.hpp"

namespace pbergman {

/// Parses a cell description:
///   {"lower_vertices": [[x, y], ...], "upper_vertices": [[x, y], ...],
///    "beta_lower": [...], "beta_upper": [...], "junction": [a, b],
///    "height_bound": M}
/// Exponents may be omitted, in which case they are derived from the polygon;
/// the junction defaults to the end points of the polylines.
/// Throws ParseError on malformed text. The result is not validated; pass it
/// to build_cell for that.
PeriodicCellSpec parse_cell_spec(const std::string& text);
/// Reads and parses a file. Throws IoError when it cannot be read.
PeriodicCellSpec load_cell_spec(const std::string& path);
std::string cell_spec_to_json(const PeriodicCellSpec& spec);

struct MapArchive {
  PeriodicCellSpec cell;
  SCParams params;
  std::map<std::string, std::string> metadata;  ///< free-form provenance (tool, version, ...)
};

/// Archive text; doubles are written in shortest round-trip form so that
/// parse(serialize(x)) reproduces x bit for bit.
std::string serialize_map_archive(const MapArchive& archive);
MapArchive parse_map_archive(const std::string& text);

void save_map_archive(const MapArchive& archive, const std::string& path);
MapArchive load_map_archive(const std::string& path);

/// Reads a whole file; throws IoError.
std::string read_text_file(const std::string& path);
/// Writes a whole file; throws IoError.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace pbergman
