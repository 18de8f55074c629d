#pragma once

#include <cstdint>

#include "ctgml/dataset.hpp"

namespace ctgml {

// Deterministic synthetic CTG-like dataset.
//
// Produces rows with the same 21-feature schema, value ranges and class
// imbalance as the public cardiotocography file, built from class-conditional
// clinical archetypes (flat-trace and decelerative pathological subtypes, an
// active-movement normal subtype, intermediate suspects). It is demo data for
// running the toolkit when the real recordings are not available; it is not
// a substitute for them.
Dataset synthesize_ctg(std::size_t rows, std::uint64_t seed);

}  // namespace ctgml
