#include <oceanprov/oceanprov.hpp>
int main(){return 0;}
