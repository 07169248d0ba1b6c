"""Linear and blocked probing under limited-independence hash families."""

__version__ = "0.1.0"
