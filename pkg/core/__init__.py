"""hlsgen compiler core."""
