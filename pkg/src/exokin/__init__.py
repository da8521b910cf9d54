"""Kinematics of a 12-DOF lower-extremity rehabilitation exoskeleton."""
