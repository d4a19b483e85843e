#pragma once

#include "qstab/error.hpp"
#include "qstab/numerics/matrix.hpp"
#include "qstab/numerics/eigen.hpp"
#include "qstab/numerics/calculus.hpp"
#include "qstab/rng.hpp"
#include "qstab/gate_params.hpp"
#include "qstab/circuit.hpp"
#include "qstab/stabilizer.hpp"
#include "qstab/learner.hpp"
#include "qstab/classifier.hpp"
#include "qstab/metrics.hpp"
#include "qstab/io.hpp"
#include "qstab/pipeline.hpp"
