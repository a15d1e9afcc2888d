"""System-dynamics simulation of waterfall software projects under requirement volatility."""
