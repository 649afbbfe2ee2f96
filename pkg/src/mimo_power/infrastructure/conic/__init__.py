"""Dense conic optimization: cone algebra and interior-point solver."""
