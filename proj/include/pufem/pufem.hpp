#pragma once

/// Umbrella header for the plate-bending PUFEM library.

#include "pufem/core_model.hpp"
#include "pufem/shape_basis.hpp"
#include "pufem/enrichment.hpp"
#include "pufem/quadrature.hpp"
#include "pufem/mesh.hpp"
#include "pufem/space.hpp"
#include "pufem/assembly.hpp"
#include "pufem/linear_solver.hpp"
#include "pufem/reference_solutions.hpp"
#include "pufem/field.hpp"
#include "pufem/analysis.hpp"
