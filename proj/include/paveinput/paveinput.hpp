#pragma once

#include "paveinput/data_adapter.hpp"
#include "paveinput/error.hpp"
#include "paveinput/hetnet.hpp"
#include "paveinput/input_model.hpp"
#include "paveinput/io.hpp"
#include "paveinput/model_file.hpp"
#include "paveinput/paving_sim.hpp"
#include "paveinput/random.hpp"
#include "paveinput/record_table.hpp"
#include "paveinput/schema.hpp"
#include "paveinput/stats.hpp"
#include "paveinput/synth_oracle.hpp"
