namespace flowline {}
