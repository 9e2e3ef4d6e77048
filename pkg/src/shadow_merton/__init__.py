"""Shadow-price solution of the Merton consumption problem with proportional costs."""
