#pragma once

// Local-order-preserving error-bounded compression for 2D/3D scalar fields.

#include "container_codec.hpp"
#include "error.hpp"
#include "grid_mesh.hpp"
#include "lossless_stages.hpp"
#include "order_fixpoint.hpp"
#include "quantizer.hpp"
#include "raw_io.hpp"
#include "report.hpp"
#include "scalar_field.hpp"
#include "topo_verify.hpp"
