#pragma once

// Umbrella header. The individual headers are self-contained; pull in just
// what you need for faster builds (config.hpp drags in the JSON library).

#include "valdist/complexutil.hpp"
#include "valdist/criteria.hpp"
#include "valdist/errors.hpp"
#include "valdist/expr.hpp"
#include "valdist/jet.hpp"
#include "valdist/locate.hpp"
#include "valdist/monomial.hpp"
#include "valdist/nevanlinna.hpp"
#include "valdist/rational.hpp"
#include "valdist/sphere.hpp"
