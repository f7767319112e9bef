#pragma once

#include "gpspec/basis.hpp"
#include "gpspec/corrector.hpp"
#include "gpspec/dense_oracle.hpp"
#include "gpspec/eigensolver.hpp"
#include "gpspec/error.hpp"
#include "gpspec/estimator.hpp"
#include "gpspec/fft.hpp"
#include "gpspec/field.hpp"
#include "gpspec/ground_solver.hpp"
#include "gpspec/io.hpp"
#include "gpspec/krylov.hpp"
#include "gpspec/model.hpp"
#include "gpspec/study.hpp"
