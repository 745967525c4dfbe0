#pragma once

#include "episcale/core/initial_distribution.hpp"
#include "episcale/core/model.hpp"
#include "episcale/core/quadrature.hpp"
#include "episcale/core/random.hpp"
#include "episcale/core/test_function.hpp"
#include "episcale/core/types.hpp"
#include "episcale/ctmc/engine.hpp"
#include "episcale/ctmc/martingale.hpp"
#include "episcale/ctmc/rate_tree.hpp"
#include "episcale/ctmc/trajectory.hpp"
#include "episcale/fields/field_io.hpp"
#include "episcale/fields/grid_field.hpp"
#include "episcale/fields/solvers.hpp"
#include "episcale/fields/weak_residual.hpp"
#include "episcale/harness/config.hpp"
#include "episcale/harness/csv.hpp"
#include "episcale/harness/experiments.hpp"
#include "episcale/harness/manifest.hpp"
#include "episcale/harness/worker_pool.hpp"
#include "episcale/kernels/interaction.hpp"
#include "episcale/kernels/kernel_spec.hpp"
#include "episcale/kernels/local_kernel.hpp"
#include "episcale/kernels/spatial_index.hpp"
#include "episcale/metrics/commutator.hpp"
#include "episcale/metrics/measures.hpp"
#include "episcale/metrics/network_simplex.hpp"
#include "episcale/metrics/slope_fit.hpp"
#include "episcale/metrics/transport.hpp"
