"""Political leaning inference from retweet interaction graphs."""

__version__ = "0.1.0"
