"""catcoh package entry."""
