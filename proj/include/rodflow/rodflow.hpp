#pragma once

#include "rodflow/error.hpp"
#include "rodflow/model_params.hpp"
#include "rodflow/sphere_geometry.hpp"
#include "rodflow/length_grid.hpp"
#include "rodflow/fields.hpp"
#include "rodflow/flow.hpp"
#include "rodflow/fragmentation.hpp"
#include "rodflow/stability.hpp"
#include "rodflow/polymer_step.hpp"
#include "rodflow/monomer_step.hpp"
#include "rodflow/diagnostics.hpp"
#include "rodflow/config.hpp"
#include "rodflow/io.hpp"
#include "rodflow/simulation.hpp"
#include "rodflow/greer_reference.hpp"
#include "rodflow/convergence.hpp"
