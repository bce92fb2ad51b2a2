#pragma once

// Umbrella header.

#include "minkowski/continued_fraction.hpp"
#include "minkowski/dyadic.hpp"
#include "minkowski/enclosure.hpp"
#include "minkowski/identities.hpp"
#include "minkowski/laplace.hpp"
#include "minkowski/parallel.hpp"
#include "minkowski/question_mark.hpp"
#include "minkowski/rational.hpp"
#include "minkowski/stern_brocot.hpp"
#include "minkowski/stieltjes.hpp"
#include "minkowski/tree_moments.hpp"
