// ttomo - placeholder
