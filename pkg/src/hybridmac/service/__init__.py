"""HTTP service exposing the simulator over a small JSON API."""
