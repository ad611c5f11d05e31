#pragma once

#include <stdexcept>

namespace cmtext {

// Geometry
struct DegeneratePolygon : std::runtime_error { using std::runtime_error::runtime_error; };
struct ChordMiss : std::runtime_error { using std::runtime_error::runtime_error; };
struct PointOutside : std::runtime_error { using std::runtime_error::runtime_error; };
struct NoIntersection : std::runtime_error { using std::runtime_error::runtime_error; };

// Grids / losses
struct DimensionMismatch : std::runtime_error { using std::runtime_error::runtime_error; };
struct TooSmall : std::runtime_error { using std::runtime_error::runtime_error; };
struct NonPositiveInput : std::runtime_error { using std::runtime_error::runtime_error; };

// Trainer
struct Diverged : std::runtime_error { using std::runtime_error::runtime_error; };

// IO
struct ParseError : std::runtime_error { using std::runtime_error::runtime_error; };
struct BadMagic : std::runtime_error { using std::runtime_error::runtime_error; };
struct BadDimensions : std::runtime_error { using std::runtime_error::runtime_error; };
struct ValueOutOfRange : std::runtime_error { using std::runtime_error::runtime_error; };

}  // namespace cmtext
