"""manipstack: hybrid planning and control for mobile manipulation under
sensing and environmental uncertainty in a simulated 2D world."""

__version__ = "0.1.0"
