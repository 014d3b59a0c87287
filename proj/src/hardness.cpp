// placeholder for hardness
