static unsigned int mode;

void select_mode(unsigned int m)
{
    switch (m) {
    case 0:
        mode = 1;
        break;
    default:
        mode = 2;
    }
}
