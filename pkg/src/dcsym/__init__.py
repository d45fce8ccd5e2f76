"""Verification engine for variable-coefficient diffusion-convection equations."""
