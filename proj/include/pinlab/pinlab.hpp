#pragma once

#include "pinlab/annealed_solver.hpp"
#include "pinlab/convolution.hpp"
#include "pinlab/enumeration.hpp"
#include "pinlab/excursion_law.hpp"
#include "pinlab/experiments.hpp"
#include "pinlab/io.hpp"
#include "pinlab/numerics.hpp"
#include "pinlab/parallel.hpp"
#include "pinlab/path_overlap.hpp"
#include "pinlab/quenched_dp.hpp"
#include "pinlab/rng.hpp"
#include "pinlab/selfcheck.hpp"
#include "pinlab/slowly_varying.hpp"
