mod calibration;
mod cli;
mod solver;
