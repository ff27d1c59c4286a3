#ifndef DIPM_DIPM_HPP_
#define DIPM_DIPM_HPP_

#include "dipm/admm_direction.hpp"
#include "dipm/barrier.hpp"
#include "dipm/coupling.hpp"
#include "dipm/dense_linalg.hpp"
#include "dipm/error.hpp"
#include "dipm/finite_difference.hpp"
#include "dipm/generator.hpp"
#include "dipm/interior_point.hpp"
#include "dipm/network.hpp"
#include "dipm/newton.hpp"
#include "dipm/oracle.hpp"
#include "dipm/problem.hpp"
#include "dipm/types.hpp"

#endif  // DIPM_DIPM_HPP_
